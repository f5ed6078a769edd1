#pragma once

#include "dal/task.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dal {

enum class Split { Train, Eval };

struct Example {
    TaskKind task = TaskKind::T1Mult;
    std::string input;
    std::string output;
    std::optional<Split> split;
    /// Operands and bookkeeping: "index", "seed", plus task operands
    /// (a/b, x/y, n/pos, left/right, a/m/product).
    std::map<std::string, std::uint64_t> meta;

    bool operator==(const Example&) const = default;
};

struct Dataset {
    std::optional<TaskKind> task;  // nullopt for merged multi-task sets
    std::uint64_t seed = 0;
    std::vector<Example> examples;

    std::size_t size() const noexcept { return examples.size(); }
    std::size_t count(Split split) const noexcept;

    bool operator==(const Dataset&) const = default;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Default sizes of the sampled corpora.
inline constexpr std::size_t kT3Size = 5000;
inline constexpr std::size_t kT4Size = 5000;
inline constexpr std::size_t kGlobalSize = 2000;

/// All 100 single-digit products.
Dataset gen_t1_mult();
/// All 1000 sums x + y with x in [0, 99] and y in [0, 9].
Dataset gen_t2_add();
/// Numbers uniform in [1000, 999999], positions uniform over their digits.
Dataset gen_t3_extract(std::size_t n, std::uint64_t seed);
/// Left operands uniform in [1, 99], right operands uniform in [1000, 999999].
Dataset gen_t4_concat(std::size_t n, std::uint64_t seed);
/// Multiplicands uniform in [1000, 999999], multipliers uniform in [1, 9].
/// Input is the trace header; output the rest of the rendered trace.
Dataset gen_global(std::size_t n, std::uint64_t seed);

/// Concatenates in argument order, then shuffles deterministically.
Dataset merge_datasets(const Dataset& first, const Dataset& second, std::uint64_t seed);

/// Labels round(n * eval_fraction) examples Eval, the rest Train. Example order
/// is preserved; which examples are Eval depends only on the seed.
Dataset split_dataset(Dataset ds, double eval_fraction, std::uint64_t seed);

/// One JSON object per line with keys "task", "input", "output", "split", "meta".
void write_jsonl(const Dataset& ds, const std::filesystem::path& path);
std::string to_jsonl(const Dataset& ds);
Dataset read_jsonl(const std::filesystem::path& path);

}  // namespace dal
