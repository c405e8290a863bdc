#pragma once

#include <map>
#include <string>
#include <string_view>

#include "htp/errors.hpp"

namespace htp {

enum class Stage { identify, categorize, normalize };

std::string_view stage_name(Stage stage);

// A chat prompt with {{slot}} placeholders in the user text. Rendering
// fails if any placeholder is left unresolved.
struct PromptTemplate {
    Stage id;
    std::string system_text;
    std::string user_text;

    struct Rendered {
        std::string system_text;
        std::string user_text;
    };
    Rendered render(const std::map<std::string, std::string>& slots) const;
};

// The three shipped stage prompts.
const PromptTemplate& identify_prompt();
const PromptTemplate& categorize_prompt();
const PromptTemplate& normalize_prompt();

} // namespace htp
