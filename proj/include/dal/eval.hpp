#pragma once

#include "dal/corpus.hpp"
#include "dal/harness.hpp"
#include "dal/task.hpp"
#include "dal/verifier.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dal {

enum class EvalMode { Direct, CoT };

std::string_view to_string(EvalMode mode) noexcept;  // "direct" / "cot"
std::optional<EvalMode> eval_mode_from_string(std::string_view name) noexcept;

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExampleOutcome {
    std::string input;
    std::string expected;
    std::string got;
    bool correct = false;
    int iterations = 0;
    std::optional<Verdict> verdict;  // CoT only
    std::optional<std::string> error;
};

struct EvalReport {
    std::string label;            // column heading for model comparisons
    std::vector<TaskKind> tasks;  // more than one for merged datasets
    EvalMode mode = EvalMode::Direct;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::optional<double> step_valid_rate;
    std::vector<ExampleOutcome> per_example;
};

/// "t3_extract", or "t1_mult + t2_add" for merged sets.
std::string task_label(const EvalReport& report);

/// Single-turn exact-match scoring of the Eval split. Replies are trimmed of
/// surrounding whitespace; no numeric normalization is applied.
EvalReport eval_subtask(const Dataset& ds, const ChatClient& client, std::size_t parallelism = 1);

/// CoT: recursive generation per question, scored by final-answer match, with
/// step_valid_rate = share of Valid verifications. Direct: one turn, reply must
/// be exactly the product.
EvalReport eval_global(const Dataset& ds, const ChatClient& client, EvalMode mode,
                       std::size_t parallelism = 1, const GenerationOptions& options = {});

EvalReport eval_subtask(const Dataset& ds, const EndpointConfig& cfg, std::size_t parallelism = 1);
EvalReport eval_global(const Dataset& ds, const EndpointConfig& cfg, EvalMode mode, std::size_t parallelism = 1,
                       const GenerationOptions& options = {});

/// "42.1%"
std::string format_percent(double ratio);

struct RenderedReport {
    std::string table;
    nlohmann::ordered_json json;
};

/// Global-task reports form one table with a column per report; subtask
/// reports form a second table with a row per task.
RenderedReport render_report(std::span<const EvalReport> reports);

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace dal
