#include "dal/cli.hpp"

#include "dal/arith.hpp"
#include "dal/corpus.hpp"
#include "dal/eval.hpp"
#include "dal/harness.hpp"
#include "dal/manifest.hpp"
#include "dal/trace_text.hpp"
#include "dal/verifier.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace dal {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 42;
constexpr double kSubtaskEvalFraction = 0.3;
constexpr double kGlobalEvalFraction = 0.1;

/// Thrown for bad flag values that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const Dataset& ds, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        out << to_jsonl(ds);
    } else {
        write_jsonl(ds, out_path);
    }
}

Dataset generate(std::string_view name, std::optional<std::size_t> n, std::uint64_t seed) {
    const auto kind = task_from_string(name);
    if (!kind) throw UsageError("unknown task '" + std::string(name) + "'");
    switch (*kind) {
        case TaskKind::T1Mult:
        case TaskKind::T2Add:
            if (n) throw UsageError(std::string(name) + " is exhaustive; --n does not apply");
            return *kind == TaskKind::T1Mult ? gen_t1_mult() : gen_t2_add();
        case TaskKind::T3Extract: return gen_t3_extract(n.value_or(kT3Size), seed);
        case TaskKind::T4Concat: return gen_t4_concat(n.value_or(kT4Size), seed);
        case TaskKind::GlobalMult: return gen_global(n.value_or(kGlobalSize), seed);
    }
    throw UsageError("unknown task");
}

/// Writes every file the default curriculum manifest references, already
/// split, plus the raw t1/t2 sets.
void generate_all(const fs::path& dir, std::uint64_t seed, std::ostream& out) {
    fs::create_directories(dir);
    const auto t1 = gen_t1_mult();
    const auto t2 = gen_t2_add();
    // Stage 1 is training-only: every merged example is labeled Train.
    auto stage1 = merge_datasets(t1, t2, seed);
    for (auto& e : stage1.examples) e.split = Split::Train;

    const std::pair<std::string, Dataset> files[] = {
        {"t1_mult.jsonl", t1},
        {"t2_add.jsonl", t2},
        {"stage1_mult_add.jsonl", stage1},
        {"t3_extract.jsonl", split_dataset(gen_t3_extract(kT3Size, seed + 3), kSubtaskEvalFraction, seed + 3)},
        {"t4_concat.jsonl", split_dataset(gen_t4_concat(kT4Size, seed + 4), kSubtaskEvalFraction, seed + 4)},
        {"global_mult.jsonl", split_dataset(gen_global(kGlobalSize, seed + 5), kGlobalEvalFraction, seed + 5)},
    };
    for (const auto& [name, ds] : files) {
        write_jsonl(ds, dir / name);
        out << name << ": " << ds.size() << " examples (" << ds.count(Split::Train) << " train, "
            << ds.count(Split::Eval) << " eval)\n";
    }
}

std::string read_all(const std::string& path, std::istream& in) {
    if (path == "-") return {std::istreambuf_iterator<char>(in), {}};
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), {}};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

Digit parse_multiplier(const std::string& text) {
    if (text.size() != 1 || text[0] < '1' || text[0] > '9') {
        throw UsageError("multiplier must be a single digit 1-9, got '" + text + "'");
    }
    return Digit(text[0] - '0');
}

Number parse_multiplicand(const std::string& text) {
    try {
        return Number::parse(text);
    } catch (const std::exception&) {
        throw UsageError("multiplicand must be a canonical decimal number, got '" + text + "'");
    }
}

}  // namespace

int cli_main(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Digit-level arithmetic trace toolkit", "dal"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a dataset as JSONL");
    std::string gen_task;
    std::optional<std::size_t> gen_n;
    std::uint64_t gen_seed = kDefaultSeed;
    std::string gen_out;
    std::string gen_out_dir;
    gen->add_option("task", gen_task, "t1_mult, t2_add, t3_extract, t4_concat, global_mult, or all")->required();
    gen->add_option("--n", gen_n, "Number of examples for sampled tasks")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "Output file (default: stdout)");
    gen->add_option("--out-dir", gen_out_dir, "Output directory for 'all'");

    // split
    auto* split = app.add_subcommand("split", "Label a dataset with Train/Eval splits");
    std::string split_in;
    double split_fraction = 0.0;
    std::uint64_t split_seed = kDefaultSeed;
    std::string split_out;
    split->add_option("input", split_in, "Input JSONL")->required();
    split->add_option("--eval-fraction", split_fraction, "Share of examples labeled Eval")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    split->add_option("--seed", split_seed, "RNG seed");
    split->add_option("--out", split_out, "Output file (default: stdout)");

    // render-trace
    auto* render = app.add_subcommand("render-trace", "Print the schoolbook trace of a*m");
    std::string render_a;
    std::string render_m;
    render->add_option("a", render_a, "Multiplicand")->required();
    render->add_option("m", render_m, "Single-digit multiplier")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "Check a trace against the oracle");
    std::string verify_path;
    std::string verify_a;
    std::string verify_m;
    bool verify_json = false;
    verify->add_option("file", verify_path, "Trace file, or - for stdin")->required();
    verify->add_option("--a", verify_a, "Multiplicand")->required();
    verify->add_option("--m", verify_m, "Multiplier")->required();
    verify->add_flag("--json", verify_json, "Print the full report as JSON");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate an endpoint on the Eval split of a dataset");
    std::string eval_dataset;
    std::string eval_config;
    std::string eval_mode_name;
    std::size_t eval_parallelism = 1;
    std::string eval_report_out;
    std::string eval_label;
    eval->add_option("dataset", eval_dataset, "Split JSONL dataset")->required();
    eval->add_option("--endpoint-config", eval_config, "Endpoint config JSON")->required();
    eval->add_option("--mode", eval_mode_name, "cot or direct (global_mult only; default cot)")
        ->check(CLI::IsMember({"cot", "direct"}));
    eval->add_option("--parallelism", eval_parallelism, "Concurrent sessions")->check(CLI::PositiveNumber);
    eval->add_option("--report-out", eval_report_out, "Write the report JSON here");
    eval->add_option("--label", eval_label, "Column label (default: model name)");

    // manifest
    auto* manifest = app.add_subcommand("manifest", "Curriculum manifest tools");
    manifest->require_subcommand(1);
    auto* validate = manifest->add_subcommand("validate", "Validate a manifest and its dataset files");
    std::string manifest_path;
    validate->add_option("path", manifest_path, "Manifest JSON")->required();

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            if (gen_task == "all") {
                if (gen_out_dir.empty()) throw UsageError("gen all needs --out-dir");
                if (gen_n) throw UsageError("gen all uses the default sizes; --n does not apply");
                generate_all(gen_out_dir, gen_seed, out);
            } else {
                if (!gen_out_dir.empty()) throw UsageError("--out-dir applies only to 'gen all'");
                emit(generate(gen_task, gen_n, gen_seed), gen_out, out);
            }
        } else if (*split) {
            if (split_fraction <= 0.0 || split_fraction >= 1.0) {
                throw UsageError("--eval-fraction must be strictly between 0 and 1");
            }
            emit(split_dataset(read_jsonl(split_in), split_fraction, split_seed), split_out, out);
        } else if (*render) {
            out << render_trace(schoolbook_trace(parse_multiplicand(render_a), parse_multiplier(render_m)));
        } else if (*verify) {
            const auto a = parse_multiplicand(verify_a);
            const auto m = parse_multiplier(verify_m);
            const auto report = verify_trace(read_all(verify_path, in), a, m);
            if (verify_json) {
                out << to_json(report).dump(2) << "\n";
            } else {
                out << to_string(report.verdict);
                if (report.first_error) {
                    out << ": line " << report.first_error->line_number << ": "
                        << to_string(report.first_error->kind) << " (" << report.first_error->detail << ")";
                }
                out << "\n";
                out << "final answer " << (report.final_correct ? "correct" : "incorrect") << ", "
                    << report.steps_correct << "/" << report.steps_checked << " steps match\n";
            }
            return report.verdict == Verdict::Valid ? 0 : 1;
        } else if (*eval) {
            const auto config_json = read_json_file(eval_config);
            const auto cfg = EndpointConfig::from_json(config_json);
            const auto options = GenerationOptions::from_json(config_json);
            const auto ds = read_jsonl(eval_dataset);
            const bool global = ds.task == TaskKind::GlobalMult;
            if (!global && eval_mode_name == "cot") throw UsageError("--mode cot applies only to global_mult");

            auto report = global ? eval_global(ds, cfg, eval_mode_name == "direct" ? EvalMode::Direct : EvalMode::CoT,
                                               eval_parallelism, options)
                                 : eval_subtask(ds, cfg, eval_parallelism);
            if (!eval_label.empty()) report.label = eval_label;
            const auto rendered = render_report(std::span(&report, 1));
            out << rendered.table;
            if (!eval_report_out.empty()) {
                std::ofstream f(eval_report_out, std::ios::binary);
                if (!f) throw std::runtime_error("cannot write " + eval_report_out);
                f << rendered.json.dump(2) << "\n";
            }
        } else if (*validate) {
            const auto m = validate_manifest(manifest_path);
            out << "manifest OK: base model " << m.base_model << ", " << m.stages.size() << " stages\n";
            for (std::size_t i = 0; i < m.stages.size(); ++i) {
                const auto& s = m.stages[i];
                out << "  " << i + 1 << ". " << s.name << " [" << to_string(s.training_mode) << "]";
                for (const auto& d : s.datasets) out << " " << d.generic_string();
                if (i < m.output_model_names.size()) out << " -> " << m.output_model_names[i];
                out << "\n";
            }
        }
    } catch (const UsageError& e) {
        err << "dal: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "dal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace dal
