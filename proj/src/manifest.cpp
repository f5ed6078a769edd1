#include "dal/manifest.hpp"

#include <fstream>
#include <set>

namespace dal {

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ManifestError(where.empty() ? key : where + "." + key, "missing");
    return *it;
}

std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    const auto& v = require(obj, key, where);
    const auto path = where.empty() ? key : where + "." + key;
    if (!v.is_string()) throw ManifestError(path, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty()) throw ManifestError(path, "must not be empty");
    return s;
}

}  // namespace

std::string_view to_string(TrainingMode mode) noexcept {
    return mode == TrainingMode::Overfit ? "overfit" : "fine_tune";
}

std::optional<TrainingMode> training_mode_from_string(std::string_view name) noexcept {
    if (name == "overfit") return TrainingMode::Overfit;
    if (name == "fine_tune") return TrainingMode::FineTune;
    return std::nullopt;
}

CurriculumManifest manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ManifestError("$", "expected an object");
    CurriculumManifest m;
    m.base_model = require_string(j, "base_model", "");

    const auto& names = require(j, "output_model_names", "");
    if (!names.is_array()) throw ManifestError("output_model_names", "expected an array");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!names[i].is_string() || names[i].get<std::string>().empty()) {
            throw ManifestError("output_model_names[" + std::to_string(i) + "]", "expected a non-empty string");
        }
        m.output_model_names.push_back(names[i].get<std::string>());
    }

    const auto& stages = require(j, "stages", "");
    if (!stages.is_array() || stages.empty()) throw ManifestError("stages", "expected a non-empty array");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const std::string where = "stages[" + std::to_string(i) + "]";
        const auto& s = stages[i];
        if (!s.is_object()) throw ManifestError(where, "expected an object");

        CurriculumStage stage;
        stage.name = require_string(s, "name", where);
        if (!seen.insert(stage.name).second) {
            throw ManifestError(where + ".name", "duplicate stage name '" + stage.name + "'");
        }

        const auto& datasets = require(s, "datasets", where);
        if (!datasets.is_array() || datasets.empty()) {
            throw ManifestError(where + ".datasets", "expected a non-empty array");
        }
        for (std::size_t k = 0; k < datasets.size(); ++k) {
            if (!datasets[k].is_string() || datasets[k].get<std::string>().empty()) {
                throw ManifestError(where + ".datasets[" + std::to_string(k) + "]", "expected a file path");
            }
            stage.datasets.emplace_back(datasets[k].get<std::string>());
        }

        const auto mode_name = require_string(s, "training_mode", where);
        const auto mode = training_mode_from_string(mode_name);
        if (!mode) {
            throw ManifestError(where + ".training_mode",
                                "unknown mode '" + mode_name + "' (expected overfit or fine_tune)");
        }
        stage.training_mode = *mode;

        if (s.contains("split_label_used")) {
            const auto label = require_string(s, "split_label_used", where);
            if (label != "train") {
                throw ManifestError(where + ".split_label_used", "must be \"train\", got '" + label + "'");
            }
        }
        m.stages.push_back(std::move(stage));
    }

    if (!m.output_model_names.empty() && m.output_model_names.size() != m.stages.size()) {
        throw ManifestError("output_model_names", "expected one name per stage (" +
                                                      std::to_string(m.stages.size()) + "), got " +
                                                      std::to_string(m.output_model_names.size()));
    }
    return m;
}

nlohmann::ordered_json to_json(const CurriculumManifest& m) {
    nlohmann::ordered_json j;
    j["base_model"] = m.base_model;
    j["output_model_names"] = m.output_model_names;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : m.stages) {
        nlohmann::ordered_json st;
        st["name"] = s.name;
        st["datasets"] = nlohmann::ordered_json::array();
        for (const auto& d : s.datasets) st["datasets"].push_back(d.generic_string());
        st["training_mode"] = to_string(s.training_mode);
        st["split_label_used"] = s.split_label_used;
        j["stages"].push_back(std::move(st));
    }
    return j;
}

CurriculumManifest validate_manifest(const std::filesystem::path& path, bool check_files) {
    std::ifstream in(path);
    if (!in) throw ManifestError(path.string(), "cannot open manifest");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ManifestError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    auto m = manifest_from_json(j);
    if (check_files) {
        const auto base = path.parent_path();
        for (std::size_t i = 0; i < m.stages.size(); ++i) {
            for (std::size_t k = 0; k < m.stages[i].datasets.size(); ++k) {
                const auto& d = m.stages[i].datasets[k];
                const auto resolved = d.is_absolute() ? d : base / d;
                if (!std::filesystem::is_regular_file(resolved)) {
                    throw ManifestError("stages[" + std::to_string(i) + "].datasets[" + std::to_string(k) + "]",
                                        "dataset file not found: " + resolved.string());
                }
            }
        }
    }
    return m;
}

CurriculumManifest default_manifest() {
    CurriculumManifest m;
    m.base_model = "meta-llama/Llama-3.2-3B-Instruct";
    m.output_model_names = {"M1", "M2", "M3", "LLM-DAL"};
    m.stages = {
        {"mult_add", {"stage1_mult_add.jsonl"}, TrainingMode::Overfit, "train"},
        {"extract", {"t3_extract.jsonl"}, TrainingMode::FineTune, "train"},
        {"concat", {"t4_concat.jsonl"}, TrainingMode::FineTune, "train"},
        {"global", {"global_mult.jsonl"}, TrainingMode::FineTune, "train"},
    };
    return m;
}

}  // namespace dal
