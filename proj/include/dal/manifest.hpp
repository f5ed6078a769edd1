#pragma once

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dal {

enum class TrainingMode { Overfit, FineTune };

std::string_view to_string(TrainingMode mode) noexcept;  // "overfit" / "fine_tune"
std::optional<TrainingMode> training_mode_from_string(std::string_view name) noexcept;

struct CurriculumStage {
    std::string name;
    std::vector<std::filesystem::path> datasets;  // as written in the file
    TrainingMode training_mode = TrainingMode::FineTune;
    std::string split_label_used = "train";

    friend bool operator==(const CurriculumStage&, const CurriculumStage&) = default;
};

struct CurriculumManifest {
    std::string base_model;
    std::vector<std::string> output_model_names;
    std::vector<CurriculumStage> stages;

    friend bool operator==(const CurriculumManifest&, const CurriculumManifest&) = default;
};

/// what() starts with the offending field path, e.g. "stages[2].training_mode: ...".
class ManifestError : public std::runtime_error {
public:
    ManifestError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Schema checks only; dataset paths are not touched.
CurriculumManifest manifest_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CurriculumManifest& m);

/// Reads and checks a manifest file. Dataset paths resolve against the
/// manifest's own directory. With check_files, every dataset must exist.
CurriculumManifest validate_manifest(const std::filesystem::path& path, bool check_files = true);

/// The staged plan that ships in curriculum/manifest.json.
CurriculumManifest default_manifest();

}  // namespace dal
