#include "dal/eval.hpp"

#include "dal/trace_text.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace dal {

namespace {

std::string trim(std::string_view s) {
    const auto ws = " \t\r\n\v\f";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<const Example*> eval_examples(const Dataset& ds) {
    std::vector<const Example*> out;
    for (const auto& e : ds.examples) {
        if (e.split == Split::Eval) out.push_back(&e);
    }
    if (out.empty()) throw EvalError("dataset has no Eval-labeled examples; run split first");
    return out;
}

std::vector<TaskKind> tasks_of(const std::vector<const Example*>& examples) {
    std::vector<TaskKind> tasks;
    for (const auto* e : examples) {
        if (std::find(tasks.begin(), tasks.end(), e->task) == tasks.end()) tasks.push_back(e->task);
    }
    std::sort(tasks.begin(), tasks.end());
    return tasks;
}

void finish(EvalReport& r) {
    r.total = r.per_example.size();
    r.correct = static_cast<std::size_t>(
        std::count_if(r.per_example.begin(), r.per_example.end(), [](const auto& o) { return o.correct; }));
    r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
}

std::pair<Number, Digit> operands(const Example& e) {
    if (e.meta.contains("a") && e.meta.contains("m") && e.meta.at("m") <= 9) {
        return {Number(e.meta.at("a")), Digit(static_cast<int>(e.meta.at("m")))};
    }
    const auto parsed = parse_trace(e.input, ParseMode::Lenient);
    for (const auto& line : parsed.lines) {
        if (line.kind == LineKind::Header && line.fields[1].size() == 1) {
            return {Number::parse(line.fields[0]), Digit(line.fields[1][0] - '0')};
        }
    }
    throw EvalError("cannot recover operands from '" + e.input + "'");
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string rstrip(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    const auto line = [&](const std::vector<std::string>& row) {
        std::string out;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += " | ";
            out += pad(row[c], width[c]);
        }
        return rstrip(out) + "\n";
    };
    std::string rule;
    for (std::size_t c = 0; c < width.size(); ++c) {
        if (c > 0) rule += "-+-";
        rule += std::string(width[c], '-');
    }
    rule += "\n";

    std::string out = rule + line(rows.front()) + rule;
    for (std::size_t r = 1; r < rows.size(); ++r) out += line(rows[r]);
    return out + rule;
}

std::string column_label(const EvalReport& r) {
    return r.label.empty() ? std::string(to_string(r.mode)) : r.label;
}

}  // namespace

std::string_view to_string(EvalMode mode) noexcept { return mode == EvalMode::CoT ? "cot" : "direct"; }

std::optional<EvalMode> eval_mode_from_string(std::string_view name) noexcept {
    if (name == "cot") return EvalMode::CoT;
    if (name == "direct") return EvalMode::Direct;
    return std::nullopt;
}

std::string task_label(const EvalReport& report) {
    std::string out;
    for (std::size_t i = 0; i < report.tasks.size(); ++i) {
        if (i > 0) out += " + ";
        out += to_string(report.tasks[i]);
    }
    return out;
}

EvalReport eval_subtask(const Dataset& ds, const ChatClient& client, std::size_t parallelism) {
    const auto examples = eval_examples(ds);
    EvalReport report;
    report.tasks = tasks_of(examples);
    if (std::find(report.tasks.begin(), report.tasks.end(), TaskKind::GlobalMult) != report.tasks.end()) {
        throw EvalError("global_mult examples are scored by eval_global");
    }
    report.mode = EvalMode::Direct;
    report.per_example.resize(examples.size());
    parallel_for(examples.size(), parallelism, [&](std::size_t i) {
        const Example& e = *examples[i];
        ExampleOutcome& o = report.per_example[i];
        o.input = e.input;
        o.expected = e.output;
        o.iterations = 1;
        try {
            const Turn prompt{Role::User, e.input};
            o.got = trim(client.complete(std::span(&prompt, 1)));
            o.correct = o.got == trim(e.output);
        } catch (const std::exception& ex) {
            o.error = ex.what();
        }
    });
    finish(report);
    return report;
}

EvalReport eval_global(const Dataset& ds, const ChatClient& client, EvalMode mode, std::size_t parallelism,
                       const GenerationOptions& options) {
    const auto examples = eval_examples(ds);
    EvalReport report;
    report.tasks = tasks_of(examples);
    if (report.tasks != std::vector{TaskKind::GlobalMult}) {
        throw EvalError("eval_global needs a global_mult dataset");
    }
    report.mode = mode;
    report.per_example.resize(examples.size());

    if (mode == EvalMode::Direct) {
        parallel_for(examples.size(), parallelism, [&](std::size_t i) {
            const Example& e = *examples[i];
            ExampleOutcome& o = report.per_example[i];
            const auto [a, m] = operands(e);
            o.input = e.input;
            o.expected = std::to_string(a.value() * m.value());
            o.iterations = 1;
            try {
                const Turn prompt{Role::User, e.input};
                o.got = trim(client.complete(std::span(&prompt, 1)));
                o.correct = o.got == o.expected;
            } catch (const std::exception& ex) {
                o.error = ex.what();
            }
        });
        finish(report);
        return report;
    }

    std::vector<std::string> questions;
    for (const auto* e : examples) questions.push_back(e->input);
    const auto sessions = batch_generate(client, questions, parallelism, options);

    std::size_t valid = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const Example& e = *examples[i];
        const auto [a, m] = operands(e);
        ExampleOutcome& o = report.per_example[i];
        o.input = e.input;
        o.expected = std::to_string(a.value() * m.value());
        o.got = sessions[i].log.stitched_output;
        o.iterations = sessions[i].log.iterations;
        o.error = sessions[i].error;
        o.correct = score_final(o.got, a, m);
        const auto v = verify_trace(e.input + "\n" + o.got, a, m);
        o.verdict = v.verdict;
        valid += v.verdict == Verdict::Valid;
    }
    finish(report);
    report.step_valid_rate = static_cast<double>(valid) / static_cast<double>(report.total);
    return report;
}

EvalReport eval_subtask(const Dataset& ds, const EndpointConfig& cfg, std::size_t parallelism) {
    const HttpChatClient client(cfg);
    auto report = eval_subtask(ds, client, parallelism);
    report.label = cfg.model;
    return report;
}

EvalReport eval_global(const Dataset& ds, const EndpointConfig& cfg, EvalMode mode, std::size_t parallelism,
                       const GenerationOptions& options) {
    const HttpChatClient client(cfg);
    auto report = eval_global(ds, client, mode, parallelism, options);
    report.label = cfg.model;
    return report;
}

std::string format_percent(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", ratio * 100.0);
    return buf;
}

RenderedReport render_report(std::span<const EvalReport> reports) {
    if (reports.empty()) throw EvalError("render_report needs at least one report");

    std::vector<const EvalReport*> global;
    std::vector<const EvalReport*> subtask;
    for (const auto& r : reports) {
        (r.tasks == std::vector{TaskKind::GlobalMult} ? global : subtask).push_back(&r);
    }

    RenderedReport out;
    if (!global.empty()) {
        std::vector<std::vector<std::string>> rows(2);
        rows[0].push_back("Task");
        rows[1].push_back("Accuracy Rate");
        const bool any_steps = std::any_of(global.begin(), global.end(),
                                           [](const EvalReport* r) { return r->step_valid_rate.has_value(); });
        if (any_steps) rows.push_back({"Step Validity"});
        for (const auto* r : global) {
            rows[0].push_back(column_label(*r));
            rows[1].push_back(format_percent(r->accuracy));
            if (any_steps) rows[2].push_back(r->step_valid_rate ? format_percent(*r->step_valid_rate) : "-");
        }
        out.table += render_table(rows);
    }
    if (!subtask.empty()) {
        if (!out.table.empty()) out.table += "\n";
        std::vector<std::vector<std::string>> rows{{"Task", "Accuracy Rate"}};
        for (const auto* r : subtask) rows.push_back({task_label(*r), format_percent(r->accuracy)});
        out.table += render_table(rows);
    }

    out.json["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) out.json["reports"].push_back(to_json(r));
    return out;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["task"] = task_label(r);
    j["mode"] = to_string(r.mode);
    j["total"] = r.total;
    j["correct"] = r.correct;
    j["accuracy"] = r.accuracy;
    j["step_valid_rate"] = r.step_valid_rate ? nlohmann::ordered_json(*r.step_valid_rate) : nullptr;
    j["per_example"] = nlohmann::ordered_json::array();
    for (const auto& o : r.per_example) {
        nlohmann::ordered_json e;
        e["input"] = o.input;
        e["expected"] = o.expected;
        e["got"] = o.got;
        e["correct"] = o.correct;
        e["iterations"] = o.iterations;
        if (o.verdict) e["verdict"] = to_string(*o.verdict);
        if (o.error) e["error"] = *o.error;
        j["per_example"].push_back(std::move(e));
    }
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.label = j.at("label").get<std::string>();
    const std::string tasks = j.at("task").get<std::string>();
    for (std::size_t start = 0; start <= tasks.size();) {
        const auto sep = tasks.find(" + ", start);
        const auto name = tasks.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
        const auto kind = task_from_string(name);
        if (!kind) throw EvalError("unknown task '" + name + "' in report");
        r.tasks.push_back(*kind);
        if (sep == std::string::npos) break;
        start = sep + 3;
    }
    const auto mode = eval_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw EvalError("unknown mode in report");
    r.mode = *mode;
    r.total = j.at("total").get<std::size_t>();
    r.correct = j.at("correct").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    if (!j.at("step_valid_rate").is_null()) r.step_valid_rate = j.at("step_valid_rate").get<double>();
    for (const auto& e : j.at("per_example")) {
        ExampleOutcome o;
        o.input = e.at("input").get<std::string>();
        o.expected = e.at("expected").get<std::string>();
        o.got = e.at("got").get<std::string>();
        o.correct = e.at("correct").get<bool>();
        o.iterations = e.at("iterations").get<int>();
        if (e.contains("verdict")) {
            const auto v = e.at("verdict").get<std::string>();
            o.verdict = v == "Valid" ? Verdict::Valid : v == "Invalid" ? Verdict::Invalid : Verdict::Unparseable;
        }
        if (e.contains("error")) o.error = e.at("error").get<std::string>();
        r.per_example.push_back(std::move(o));
    }
    return r;
}

}  // namespace dal
