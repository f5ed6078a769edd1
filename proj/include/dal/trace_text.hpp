#pragma once

// Natural-language trace grammar: rendering, parsing and sentinel detection.
//
// A trace is a header line followed by one block per multiplicand digit and a
// footer that folds in the final carry. Every non-blank line instantiates one
// template; numeric fields are decimal digit runs. See docs/trace_grammar.md.

#include "dal/arith.hpp"
#include "dal/task.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dal {

enum class LineKind {
    Header,
    CarryInit,
    DigitExtract,
    DigitMult,
    CarryAdd,
    CompareGE10,
    CompareLT10,
    FirstDigit,
    ConcatGE10,
    ConcatLT10,
    ConcatResult,
    CarryFromSecondDigit,
    FinalCarryPositive,
    FinalCarryZero,
    FinalCarryConcat,
    FinalConcatResult,
    FinalResult,
    Blank,
};

std::string_view to_string(LineKind kind) noexcept;

/// A trace line in semantic form: its template and the captured field values,
/// in the order they appear in the text.
struct TraceLine {
    LineKind kind = LineKind::Blank;
    std::vector<std::string> fields;

    bool operator==(const TraceLine&) const = default;
};

/// Lines of the rendered trace, blank separators included.
std::vector<TraceLine> trace_lines(const MultiplicationTrace& trace);

/// Instantiates the template for `line.kind`; throws std::invalid_argument on
/// a field-count mismatch.
std::string render_line(const TraceLine& line);

/// Renders lines joined by '\n', with a trailing newline.
std::string render_lines(std::span<const TraceLine> lines);

std::string render_trace(const MultiplicationTrace& trace);

/// "multiplying {a} by {m}: {a}*{m}="
std::string render_header(const Number& multiplicand, std::uint64_t multiplier);

struct SubtaskText {
    std::string input;
    std::string output;

    bool operator==(const SubtaskText&) const = default;
};

/// "1st", "2nd", "3rd", "4th", ..., "11th", "12th", "13th", "21st", ...
std::string ordinal(std::uint64_t n);

SubtaskText render_mult(Digit a, Digit b);
/// x in [0, 99].
SubtaskText render_add(std::uint64_t x, Digit y);
/// pos counts from the most significant digit.
SubtaskText render_extract(const Number& n, std::size_t pos);
SubtaskText render_concat(const Number& left, const Number& right);

/// Dispatches on `kind` with positional params:
///   T1Mult {a, b}, T2Add {x, y}, T3Extract {n, pos}, T4Concat {left, right},
///   GlobalMult {a, m} (input = header, output = trace body).
/// Throws std::domain_error on out-of-range params.
SubtaskText render_subtask(TaskKind kind, std::span<const std::uint64_t> params);

enum class ParseMode { Strict, Lenient };

enum class IssueKind { Malformed, Unexpected, Missing };

std::string_view to_string(IssueKind kind) noexcept;

struct ParseIssue {
    std::size_t line_number = 0;  // 1-based; one past the last line for Missing at EOF
    IssueKind kind = IssueKind::Malformed;
    std::string text;
};

/// A recognized line of input with its resolved kind.
struct ParsedLine {
    std::size_t line_number = 0;
    LineKind kind = LineKind::Blank;
    std::vector<std::string> fields;
};

struct ParseOutcome {
    std::optional<MultiplicationTrace> trace;
    std::vector<ParseIssue> issues;
    /// Recognized lines up to and including the first FinalResult line.
    std::vector<ParsedLine> lines;
};

/// Strict: every non-blank line must follow the grammar; any deviation yields
/// no trace. Lenient: unrecognized lines are reported and skipped; a trace is
/// assembled when a header, at least one block and a FinalResult line exist.
/// Field values are taken verbatim; no arithmetic is checked here.
ParseOutcome parse_trace(std::string_view text, ParseMode mode);

/// True iff some line of `text` matches "the final_result is {digits}".
bool detect_terminal(std::string_view text);

/// Digits of the first FinalResult line, if any.
std::optional<std::string> find_final_result(std::string_view text);

/// Trims, collapses whitespace runs, drops spaces next to operators (= * + < >),
/// lowercases the leading keyword and folds the "temporary_result" alias.
std::string normalize_line(std::string_view line);

}  // namespace dal
