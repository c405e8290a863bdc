#!/usr/bin/env python3
"""Regenerates the committed test fixtures. Deterministic (seeded RNG)."""
import gzip
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def write(path, content):
    full = os.path.join(HERE, path)
    os.makedirs(os.path.dirname(full), exist_ok=True)
    with open(full, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)


# --------------------------------------------------------------------------
# Ontology fixtures

OBO = """format-version: 1.2
ontology: hp-fixture

[Term]
id: HP:0000687
name: Oromotor apraxia
synonym: "Oral apraxia" EXACT []
is_a: HP:0000750 ! Fixture parent

[Term]
id: HP:0001250
name: Seizure
synonym: "Seizures" EXACT []
synonym: "Epileptic seizure" EXACT []

[Term]
id: HP:0001251
name: Ataxia

[Term]
id: HP:0001265
name: Hyporeflexia
synonym: "Decreased reflexes" EXACT []

[Term]
id: HP:0001288
name: Gait disturbance
synonym: "Abnormal gait" EXACT []

[Term]
id: HP:0001324
name: Muscle weakness
synonym: "Weakness" EXACT []

[Term]
id: HP:0001337
name: Tremor

[Term]
id: HP:0001761
name: Pes cavus

[Term]
id: HP:0002064
name: Spastic gait

[Term]
id: HP:0002072
name: Chorea

[Term]
id: HP:0003202
name: Skeletal muscle atrophy
synonym: "Muscle atrophy" EXACT []
synonym: "Amyotrophy" EXACT []

[Term]
id: HP:0003474
name: Sensory impairment
synonym: "Sensory loss" EXACT []

[Term]
id: HP:0031826
name: Abnormal reflex

[Term]
id: HP:0031827
name: Reflex anomaly
synonym: "Abnormal reflex" EXACT []

[Term]
id: HP:0200134
name: Epileptic encephalopathy
is_obsolete: true
"""

TINY_OBO = """format-version: 1.2

[Term]
id: HP:0000001
name: All

[Term]
id: HP:0000002
name: Abnormality of body height

[Term]
id: HP:0000003
name: Multicystic kidney dysplasia
"""


def obo_to_json(obo_text):
    nodes = []
    edges = []
    term = None
    for line in obo_text.splitlines():
        line = line.strip()
        if line == "[Term]":
            term = {}
            nodes.append(term)
            continue
        if not line or term is None or ":" not in line:
            continue
        key, value = line.split(":", 1)
        key = key.strip()
        value = value.strip()
        if key == "id":
            term["id"] = "http://purl.obolibrary.org/obo/" + value.replace(":", "_")
        elif key == "name":
            term["lbl"] = value
        elif key == "synonym":
            syn = value.split('"')[1]
            term.setdefault("meta", {}).setdefault("synonyms", []).append(
                {"pred": "hasExactSynonym", "val": syn})
        elif key == "is_obsolete" and value.startswith("true"):
            term.setdefault("meta", {})["deprecated"] = True
        elif key == "is_a":
            obj = value.split("!")[0].strip()
            edges.append({
                "sub": term["id"],
                "pred": "is_a",
                "obj": "http://purl.obolibrary.org/obo/" + obj.replace(":", "_"),
            })
    return {"graphs": [{"id": "hp-fixture", "nodes": nodes, "edges": edges}]}


write("hpo.obo", OBO)
write("hpo_tiny.obo", TINY_OBO)
write("hpo.json", json.dumps(obo_to_json(OBO), indent=2) + "\n")

# --------------------------------------------------------------------------
# Word vectors (dim 8). Covers every sign and candidate token in the
# mini corpus; "xq" and "zr" stay deliberately out of vocabulary.

TOKENS = [
    "abnormal", "amyotrophy", "anomaly", "apraxia", "ataxia", "atrophy",
    "cavus", "childhood", "chorea", "decreased", "disturbance", "dystonia",
    "encephalopathy", "epileptic", "gait", "hyporeflexia", "impairment",
    "loss", "mild", "muscle", "oral", "oromotor", "patients", "pes",
    "progressive", "prominent", "reflex", "reflexes", "rigidity", "seizure",
    "seizures", "sensory", "skeletal", "spastic", "tremor", "weakness",
]

rng = random.Random(20240917)
lines = [f"{len(TOKENS)} 8"]
for token in TOKENS:
    values = [f"{rng.uniform(-1.0, 1.0):.6f}" for _ in range(8)]
    lines.append(token + " " + " ".join(values))
vectors_text = "\n".join(lines) + "\n"
write("vectors.txt", vectors_text)
with gzip.GzipFile(os.path.join(HERE, "vectors.txt.gz"), mode="wb", mtime=0) as f:
    f.write(vectors_text.encode())

# --------------------------------------------------------------------------
# Mini corpus: 5 diseases in 2 series, cached summaries + manifests.

SERIES = {
    "PS900001": ("Fixture myopathy series", ["100100", "100200", "100300"]),
    "PS900002": ("Fixture tremor series", ["200100", "200200"]),
}

DISEASES = {
    "100100": {
        "name": "Fixture myopathy 1",
        "description": "A progressive disorder of muscle described in childhood.",
        "clinical_features": "Patients show weakness with muscle atrophy. "
                             "Spastic gait was noted. Seizures occurred in childhood.",
        "clinical_synopsis": "Neurologic: spastic gait; seizures",
    },
    "100200": {
        "name": "Fixture myopathy 2",
        "description": "A fixture disease with neuropathy.",
        "clinical_features": "Examination showed weakness and pes cavus. "
                             "Sensory loss and hyporeflexia were present.",
        "clinical_synopsis": "",
    },
    "100300": {
        "name": "Fixture myopathy 3",
        "description": "A fixture ataxia syndrome.",
        "clinical_features": "Muscle atrophy with abnormal gait. Ataxia was prominent.",
        "clinical_synopsis": "",
    },
    "200100": {
        "name": "Fixture tremor 1",
        "description": "A fixture tremor condition.",
        "clinical_features": "Patients exhibit tremor. Oral apraxia was described.",
        "clinical_synopsis": "",
    },
    "200200": {
        "name": "Fixture tremor 2",
        "description": "Another fixture tremor condition.",
        "clinical_features": "Tremor with seizures. Mild weakness developed late.",
        "clinical_synopsis": "",
    },
}


def preprocess(text):
    out = []
    pending = False
    for ch in text:
        if ch in " \t\n\r\f\v,-;'\"/\\–—‘’“”":
            pending = True
            continue
        if pending and out:
            out.append(" ")
        pending = False
        out.append(ch)
    return "".join(out)


for mim, info in DISEASES.items():
    raw_entry = json.dumps({
        "omim": {"entryList": [{"entry": {
            "mimNumber": int(mim),
            "textSectionList": [
                {"textSection": {"textSectionName": "description",
                                 "textSectionContent": info["description"]}},
                {"textSection": {"textSectionName": "clinicalFeatures",
                                 "textSectionContent": info["clinical_features"]}},
            ]}}]}})
    raw_synopsis = json.dumps({
        "omim": {"clinicalSynopsisList": [{"clinicalSynopsis": {
            "mimNumber": int(mim),
            "neurologicCentralNervousSystem": info["clinical_synopsis"],
        }}]}} if info["clinical_synopsis"] else {"omim": {"clinicalSynopsisList": []}})
    cached = {
        "mim": mim,
        "retrieved_at": "2025-01-15T00:00:00Z",
        "raw": {"entry": raw_entry, "clinical_synopsis": raw_synopsis},
        "summary": {
            "description": preprocess(info["description"]),
            "clinical_features": preprocess(info["clinical_features"]),
            "clinical_synopsis": preprocess(info["clinical_synopsis"]),
        },
    }
    write(f"cache/{mim}.summary.json", json.dumps(cached, indent=2, sort_keys=True) + "\n")

manifest_list = []
for series_id, (name, mims) in SERIES.items():
    manifest = {
        "series_id": series_id,
        "name": name,
        "diseases": [{"mim": m, "name": DISEASES[m]["name"]} for m in mims],
        "raw": "",
    }
    write(f"cache/{series_id}.series.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    manifest_list.append({k: manifest[k] for k in ("series_id", "name", "diseases")})
write("manifest.json", json.dumps(manifest_list, indent=2) + "\n")

# --------------------------------------------------------------------------
# Replay fixtures. 200100 answers with relaxed single-quote JSON and
# 200200 wraps its identify answer in a code fence; both forms appear in
# real model output.

IDENTIFY = {
    "100100": '{"Signs": ["weakness", "muscle atrophy", "spastic gait", "seizures"]}',
    "100200": '{"Signs": ["weakness", "pes cavus", "sensory loss", "hyporeflexia"]}',
    "100300": '{"Signs": ["muscle atrophy", "abnormal gait", "ataxia"]}',
    "200100": "{'Signs': ['tremor', 'oral apraxia']}",
    "200200": 'Here are the extracted signs:\n```json\n{"Signs": ["tremor", "seizures", "weakness"]}\n```\n',
}

CATEGORIZE = {
    "100100": {"Weakness": ["weakness"], "Muscle Atrophy": ["muscle atrophy"],
               "Gait": ["spastic gait"], "Seizure": ["seizures"]},
    "100200": {"Weakness": ["weakness"], "Deformity": ["pes cavus"],
               "Sensory": ["sensory loss"], "Hyporeflexia": ["hyporeflexia"]},
    "100300": {"Muscle Atrophy": ["muscle atrophy"], "Gait": ["abnormal gait"],
               "Incoordination": ["ataxia"]},
    # "Reflexes" is not one of the 30 categories.
    "200100": {"Tremor": ["tremor"], "Reflexes": ["oral apraxia"]},
    # Drops "weakness" entirely.
    "200200": {"Tremor": ["tremor"], "Seizure": ["seizures"]},
}

NORMALIZE = {
    "100100": {
        "weakness": {"HPO Term": "Muscle weakness", "HPO ID": "HP:0001324"},
        "muscle atrophy": {"HPO Term": "Skeletal muscle atrophy", "HPO ID": "HP:0003202"},
        "spastic gait": {"HPO Term": "Spastic gait", "HPO ID": "HP:0002064"},
        "seizures": {"HPO Term": "Seizure", "HPO ID": "HP:0001250"},
    },
    "100200": {
        "weakness": {"HPO Term": "Muscle weakness", "HPO ID": "HP:0001324"},
        "pes cavus": {"HPO Term": "Pes cavus", "HPO ID": "HP:0001761"},
        "sensory loss": {"HPO Term": "Sensory impairment", "HPO ID": "HP:0003474"},
        "hyporeflexia": {"HPO Term": "Hyporeflexia", "HPO ID": "HP:0001265"},
    },
    "100300": {
        "muscle atrophy": {"HPO Term": "Skeletal muscle atrophy", "HPO ID": "HP:0003202"},
        "abnormal gait": {"HPO Term": "Gait disturbance", "HPO ID": "HP:0001288"},
        "ataxia": {"HPO Term": "Ataxia", "HPO ID": "HP:0001251"},
    },
    "200100": {
        "tremor": {"HPO Term": "Tremor", "HPO ID": "HP:0001337"},
        "oral apraxia": {"HPO Term": "Oromotor apraxia", "HPO ID": "HP:0000687"},
    },
    "200200": {
        "tremor": {"HPO Term": "Tremor", "HPO ID": "HP:0001337"},
        "seizures": {"HPO Term": "Seizure", "HPO ID": "HP:0001250"},
        "weakness": {"HPO Term": "not-mappable", "HPO ID": "not-mappable"},
    },
}

for mim, body in IDENTIFY.items():
    write(f"replay/{mim}.identify.json", body if body.endswith("\n") else body + "\n")
for mim, body in CATEGORIZE.items():
    write(f"replay/{mim}.categorize.json", json.dumps(body, indent=2) + "\n")
for mim, body in NORMALIZE.items():
    write(f"replay/{mim}.normalize.json", json.dumps(body, indent=2) + "\n")

# --------------------------------------------------------------------------
# Lexicon phrases.

write("lexicon.txt", "\n".join([
    "# mini-corpus lexicon",
    "weakness",
    "muscle atrophy",
    "spastic gait",
    "gait",
    "abnormal gait",
    "seizures",
    "pes cavus",
    "sensory loss",
    "hyporeflexia",
    "ataxia",
    "tremor",
    "oral apraxia",
]) + "\n")

# --------------------------------------------------------------------------
# Gold annotations: a1 mirrors the replay outputs for 100100/100200;
# a2 diverges (one different sign and one different category/id).

ANNOTATIONS = [
    ("100100", "a1", "weakness", "Weakness", "HP:0001324"),
    ("100100", "a1", "muscle atrophy", "Muscle Atrophy", "HP:0003202"),
    ("100100", "a1", "spastic gait", "Gait", "HP:0002064"),
    ("100100", "a1", "seizures", "Seizure", "HP:0001250"),
    ("100200", "a1", "weakness", "Weakness", "HP:0001324"),
    ("100200", "a1", "pes cavus", "Deformity", "HP:0001761"),
    ("100200", "a1", "sensory loss", "Sensory", "HP:0003474"),
    ("100200", "a1", "hyporeflexia", "Hyporeflexia", "HP:0001265"),
    ("100100", "a2", "weakness", "Weakness", "HP:0001324"),
    ("100100", "a2", "muscle atrophy", "Muscle Atrophy", "HP:0003202"),
    ("100100", "a2", "spastic gait", "Hypertonia", "HP:0002064"),
    ("100200", "a2", "weakness", "Weakness", "HP:0001324"),
    ("100200", "a2", "pes cavus", "Deformity", "HP:0001761"),
    ("100200", "a2", "decreased reflexes", "Hyporeflexia", "HP:0001265"),
]

lines = ["mim,annotator,sign,category,hpo_id"]
for row in ANNOTATIONS:
    lines.append(",".join(row))
write("annotations.csv", "\n".join(lines) + "\n")

print("fixtures written under", HERE)
