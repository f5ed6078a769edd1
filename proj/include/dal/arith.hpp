#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dal {

/// A single decimal digit in [0, 9].
class Digit {
public:
    constexpr Digit() = default;
    constexpr explicit Digit(int value) : value_(static_cast<unsigned>(value)) {
        if (value < 0 || value > 9) {
            throw std::domain_error("digit out of range: " + std::to_string(value));
        }
    }

    constexpr unsigned value() const noexcept { return value_; }
    constexpr auto operator<=>(const Digit&) const = default;

private:
    unsigned value_ = 0;
};

/// Non-negative integer paired with its canonical decimal spelling.
class Number {
public:
    Number() = default;
    explicit Number(std::uint64_t value) : value_(value), digits_(std::to_string(value)) {}

    /// Accepts only canonical digit strings: non-empty, decimal, no leading zero
    /// unless the value is zero.
    static Number parse(std::string_view digits);

    std::uint64_t value() const noexcept { return value_; }
    const std::string& digits() const noexcept { return digits_; }
    std::size_t size() const noexcept { return digits_.size(); }

    bool operator==(const Number& other) const noexcept { return value_ == other.value_; }
    auto operator<=>(const Number& other) const noexcept { return value_ <=> other.value_; }

private:
    std::uint64_t value_ = 0;
    std::string digits_ = "0";
};

enum class DigitOrder { MsbFirst, LsbFirst };

enum class Branch { GE10, LT10 };

/// One iteration of the schoolbook loop over the multiplicand's digits.
///
/// Numeric fields are plain integers rather than `Digit` so that traces parsed
/// from model output can hold out-of-range values for the verifier to flag.
struct DigitBlock {
    std::size_t index = 0;  // 1-based, least-significant digit first
    std::uint64_t carry_in = 0;
    std::uint64_t digit = 0;
    std::uint64_t temp_mult = 0;
    std::uint64_t temp_add = 0;
    Branch branch = Branch::LT10;
    std::optional<std::uint64_t> fd_result;
    std::uint64_t carry_out = 0;
    std::string result_before;
    std::string result_after;

    bool operator==(const DigitBlock&) const = default;
};

struct MultiplicationTrace {
    Number multiplicand;
    std::uint64_t multiplier = 0;
    std::vector<DigitBlock> blocks;
    std::uint64_t final_carry = 0;
    /// Accumulator text after the final-carry fold; equals final_result.digits()
    /// except when zero operands are enabled and leading zeros are retained.
    std::string final_digits;
    Number final_result;

    bool operator==(const MultiplicationTrace&) const = default;
};

struct TraceOptions {
    /// Permit a zero multiplicand or multiplier. The accumulator then keeps
    /// leading zeros ("0000" for 5847 x 0).
    bool allow_zero = false;
};

MultiplicationTrace schoolbook_trace(const Number& multiplicand, Digit multiplier,
                                     TraceOptions options = {});

/// Returns an empty string when `trace` is consistent, otherwise a description
/// of the first violated invariant.
std::string check_trace(const MultiplicationTrace& trace);

Digit extract_digit(const Number& n, std::size_t pos, DigitOrder order);

std::string concat_left(const Number& left, std::string_view right);

unsigned mult_digits(Digit a, Digit b) noexcept;

/// x must lie in [0, 99].
unsigned add_small(unsigned x, Digit y);

}  // namespace dal
