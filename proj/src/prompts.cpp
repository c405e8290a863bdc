#include "htp/prompts.hpp"

namespace htp {

std::string_view stage_name(Stage stage) {
    switch (stage) {
    case Stage::identify: return "identify";
    case Stage::categorize: return "categorize";
    case Stage::normalize: return "normalize";
    }
    return "unknown";
}

PromptTemplate::Rendered PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
    std::string user = user_text;
    for (const auto& [key, value] : slots) {
        const std::string placeholder = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = user.find(placeholder, pos)) != std::string::npos) {
            user.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    if (const std::size_t open = user.find("{{"); open != std::string::npos) {
        const std::size_t close = user.find("}}", open);
        const std::string name = close == std::string::npos
                                     ? user.substr(open)
                                     : user.substr(open + 2, close - open - 2);
        throw ValidationError("prompt has unresolved placeholder '" + name + "'");
    }
    return Rendered{system_text, user};
}

const PromptTemplate& identify_prompt() {
    static const PromptTemplate tmpl{
        Stage::identify,
        "You are a neurologist analyzing a case summary from OMIM.",
        "Your input is text containing 'Clinical Features' and 'Description'. "
        "Extract relevant neurological symptoms (patient complaints) and signs "
        "(findings on examination). Here's how the output should look:\n\n"
        "'Signs': ['symptom a', 'symptom b', 'symptom c']\n\n"
        "{{text}}"};
    return tmpl;
}

const PromptTemplate& categorize_prompt() {
    static const PromptTemplate tmpl{
        Stage::categorize,
        "You are a neurologist analyzing a list of signs.",
        "Classify each sign into one of these categories:\n\n"
        "'Behavior,' 'Bowel and Bladder,' 'Cognitive,' 'Deformity,' 'Dysautonomia,' "
        "'Dystonia,' 'Extraocular Movements,' 'Fatigue,' 'Gait,' 'Head Shape,' "
        "'Hearing,' 'Hyperkinesia,' 'Hyperreflexia,' 'Hypertonia,' 'Hypokinesia,' "
        "'Hyporeflexia,' 'Hypotonia,' 'Incoordination,' 'Muscle Atrophy,' "
        "'Other Cranial Nerve,' 'Pain,' 'Seizure,' 'Sensory,' 'Skin,' 'Sleep,' "
        "'Speech,' 'Tremor,' 'Unclassified,' 'Vision,' 'Weakness.'\n\n"
        "Your output should be a JSON object with each category as a key and a "
        "list of signs in that category as items.\n\n"
        "{{signs}}"};
    return tmpl;
}

const PromptTemplate& normalize_prompt() {
    static const PromptTemplate tmpl{
        Stage::normalize,
        "You are a neurologist tasked with mapping each sign to a concept in the "
        "Human Phenotype Ontology (HPO).",
        "Your output should be a JSON object with each input sign as a key and "
        "two item values: the 'HPO Term' and the 'HPO ID.'\n"
        "For example:\n\n"
        "{'input': 'Apraxia oral,'\n"
        " 'HPO Term': 'Oromotor apraxia,'\n"
        " 'HPO ID': 'HP:0000687'}\n\n"
        "If the input term cannot be mapped to HPO, return 'not-mappable' in the "
        "'HPO Term' and 'HPO ID' fields.\n\n"
        "{{signs}}"};
    return tmpl;
}

} // namespace htp
