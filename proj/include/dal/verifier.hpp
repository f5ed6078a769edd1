#pragma once

#include "dal/arith.hpp"
#include "dal/trace_text.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dal {

enum class ErrorKind {
    Malformed,        // a line shaped like a template that does not parse
    ArithmeticError,  // a computed value (digit, temp_mult, temp_add, fd_result, concat) is wrong
    StateMismatch,    // a restated value (operand, index, carry, accumulator) breaks continuity
    BranchError,      // the comparison against 10 went the wrong way
    OrderError,       // a mandatory line is missing or out of place
    FinalMismatch,    // the final_result line disagrees with a x m
};

enum class Verdict { Valid, Invalid, Unparseable };

std::string_view to_string(ErrorKind kind) noexcept;
std::string_view to_string(Verdict verdict) noexcept;

struct StepError {
    std::size_t line_number = 0;
    ErrorKind kind = ErrorKind::OrderError;
    std::string detail;
};

struct VerificationReport {
    Verdict verdict = Verdict::Unparseable;
    bool final_correct = false;
    std::optional<StepError> first_error;
    std::size_t steps_checked = 0;  // lines of the oracle trace
    std::size_t steps_correct = 0;  // oracle lines matched verbatim
};

/// Replays schoolbook_trace(a, m) against the leniently parsed `text`. Every
/// captured field is compared to the oracle's; the first deviation becomes
/// first_error.
VerificationReport verify_trace(std::string_view text, const Number& a, Digit m);

/// Final-answer match: the first FinalResult line's digits equal a x m.
bool score_final(std::string_view text, const Number& a, Digit m);

nlohmann::json to_json(const VerificationReport& report);

/// Addresses one numeric field of one rendered line.
struct FieldSelector {
    std::size_t line_number = 0;  // 1-based line of render_trace output
    std::size_t field = 0;        // 0-based capture index within the line

    bool operator==(const FieldSelector&) const = default;
};

/// Every selector inject_fault accepts for `trace` (non-empty fields only).
std::vector<FieldSelector> mutable_fields(const MultiplicationTrace& trace);

/// Renders `trace` with the selected field replaced by a different value with
/// the same digit count (single digits may become any other digit).
/// Throws std::out_of_range for a selector that does not address a non-empty field.
std::string inject_fault(const MultiplicationTrace& trace, FieldSelector selector,
                         std::uint64_t seed);

}  // namespace dal
