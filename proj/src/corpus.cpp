#include "dal/corpus.hpp"

#include "dal/trace_text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace dal {

namespace {

using json = nlohmann::ordered_json;

void require_count(std::size_t n) {
    if (n == 0) throw std::invalid_argument("dataset size must be >= 1");
}

Example make_example(TaskKind task, SubtaskText text, std::map<std::string, std::uint64_t> meta,
                     std::size_t index, std::uint64_t seed) {
    meta["index"] = index;
    meta["seed"] = seed;
    return {task, std::move(text.input), std::move(text.output), std::nullopt, std::move(meta)};
}

std::string_view split_name(Split s) { return s == Split::Train ? "train" : "eval"; }

json example_to_json(const Example& ex) {
    json j;
    j["task"] = to_string(ex.task);
    j["input"] = ex.input;
    j["output"] = ex.output;
    j["split"] = ex.split ? json(split_name(*ex.split)) : json(nullptr);
    j["meta"] = json::object();
    for (const auto& [k, v] : ex.meta) j["meta"][k] = v;
    return j;
}

Example example_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw CorpusError("expected a JSON object");
    for (const char* key : {"task", "input", "output", "split", "meta"}) {
        if (!j.contains(key)) throw CorpusError(std::string("missing key \"") + key + "\"");
    }
    Example ex;
    const auto task = task_from_string(j.at("task").get<std::string>());
    if (!task) throw CorpusError("unknown task \"" + j.at("task").get<std::string>() + "\"");
    ex.task = *task;
    ex.input = j.at("input").get<std::string>();
    ex.output = j.at("output").get<std::string>();
    if (ex.output.empty()) throw CorpusError("empty output");
    const auto& split = j.at("split");
    if (!split.is_null()) {
        const auto s = split.get<std::string>();
        if (s == "train") ex.split = Split::Train;
        else if (s == "eval") ex.split = Split::Eval;
        else throw CorpusError("unknown split \"" + s + "\"");
    }
    const auto& meta = j.at("meta");
    if (!meta.is_object()) throw CorpusError("\"meta\" must be an object");
    for (const auto& [k, v] : meta.items()) {
        if (!v.is_number_unsigned()) throw CorpusError("meta \"" + k + "\" must be a non-negative integer");
        ex.meta[k] = v.get<std::uint64_t>();
    }
    return ex;
}

}  // namespace

std::size_t Dataset::count(Split split) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        examples.begin(), examples.end(), [split](const Example& e) { return e.split == split; }));
}

Dataset gen_t1_mult() {
    Dataset ds{TaskKind::T1Mult, 0, {}};
    for (int a = 0; a <= 9; ++a) {
        for (int b = 0; b <= 9; ++b) {
            ds.examples.push_back(make_example(
                TaskKind::T1Mult, render_mult(Digit(a), Digit(b)),
                {{"a", static_cast<std::uint64_t>(a)}, {"b", static_cast<std::uint64_t>(b)}},
                ds.examples.size(), 0));
        }
    }
    return ds;
}

Dataset gen_t2_add() {
    Dataset ds{TaskKind::T2Add, 0, {}};
    for (std::uint64_t x = 0; x <= 99; ++x) {
        for (int y = 0; y <= 9; ++y) {
            ds.examples.push_back(make_example(TaskKind::T2Add, render_add(x, Digit(y)),
                                               {{"x", x}, {"y", static_cast<std::uint64_t>(y)}},
                                               ds.examples.size(), 0));
        }
    }
    return ds;
}

Dataset gen_t3_extract(std::size_t n, std::uint64_t seed) {
    require_count(n);
    Dataset ds{TaskKind::T3Extract, seed, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> number(1000, 999999);
    for (std::size_t i = 0; i < n; ++i) {
        const Number value(number(rng));
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(1, value.size())(rng);
        ds.examples.push_back(make_example(TaskKind::T3Extract, render_extract(value, pos),
                                           {{"n", value.value()}, {"pos", pos}}, i, seed));
    }
    return ds;
}

Dataset gen_t4_concat(std::size_t n, std::uint64_t seed) {
    require_count(n);
    Dataset ds{TaskKind::T4Concat, seed, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> left(1, 99);
    std::uniform_int_distribution<std::uint64_t> right(1000, 999999);
    for (std::size_t i = 0; i < n; ++i) {
        const Number l(left(rng));
        const Number r(right(rng));
        ds.examples.push_back(make_example(TaskKind::T4Concat, render_concat(l, r),
                                           {{"left", l.value()}, {"right", r.value()}}, i, seed));
    }
    return ds;
}

Dataset gen_global(std::size_t n, std::uint64_t seed) {
    require_count(n);
    Dataset ds{TaskKind::GlobalMult, seed, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> multiplicand(1000, 999999);
    std::uniform_int_distribution<std::uint64_t> multiplier(1, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t params[] = {multiplicand(rng), multiplier(rng)};
        ds.examples.push_back(make_example(
            TaskKind::GlobalMult, render_subtask(TaskKind::GlobalMult, params),
            {{"a", params[0]}, {"m", params[1]}, {"product", params[0] * params[1]}}, i, seed));
    }
    return ds;
}

Dataset merge_datasets(const Dataset& first, const Dataset& second, std::uint64_t seed) {
    Dataset merged{std::nullopt, seed, first.examples};
    merged.examples.insert(merged.examples.end(), second.examples.begin(), second.examples.end());
    if (first.task && first.task == second.task) merged.task = first.task;
    std::mt19937_64 rng(seed);
    std::shuffle(merged.examples.begin(), merged.examples.end(), rng);
    return merged;
}

Dataset split_dataset(Dataset ds, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw std::invalid_argument("eval fraction must lie strictly between 0 and 1");
    }
    const std::size_t n = ds.examples.size();
    const auto eval_count = static_cast<std::size_t>(std::llround(static_cast<double>(n) * eval_fraction));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
        ds.examples[order[k]].split = k < eval_count ? Split::Eval : Split::Train;
    }
    return ds;
}

std::string to_jsonl(const Dataset& ds) {
    std::string out;
    for (const auto& ex : ds.examples) {
        out += example_to_json(ex).dump();
        out.push_back('\n');
    }
    return out;
}

void write_jsonl(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw CorpusError("cannot open " + path.string() + " for writing");
    file << to_jsonl(ds);
    file.flush();
    if (!file) throw CorpusError("write failed: " + path.string());
}

Dataset read_jsonl(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw CorpusError("cannot open " + path.string());
    Dataset ds;
    std::string line;
    std::size_t number = 0;
    while (std::getline(file, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            ds.examples.push_back(example_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw CorpusError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    if (file.bad()) throw CorpusError("read failed: " + path.string());
    if (!ds.examples.empty()) {
        const TaskKind first = ds.examples.front().task;
        const bool uniform = std::all_of(ds.examples.begin(), ds.examples.end(),
                                         [first](const Example& e) { return e.task == first; });
        if (uniform) ds.task = first;
        if (auto it = ds.examples.front().meta.find("seed"); it != ds.examples.front().meta.end()) {
            ds.seed = it->second;
        }
    }
    return ds;
}

}  // namespace dal
