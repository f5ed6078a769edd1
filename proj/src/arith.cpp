#include "dal/arith.hpp"

#include <algorithm>
#include <charconv>

namespace dal {

Number Number::parse(std::string_view digits) {
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
        throw std::invalid_argument("not a decimal digit string: '" + std::string(digits) + "'");
    }
    if (digits.size() > 1 && digits.front() == '0') {
        throw std::invalid_argument("leading zero in '" + std::string(digits) + "'");
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw std::out_of_range("number too large: '" + std::string(digits) + "'");
    }
    return Number(value);
}

MultiplicationTrace schoolbook_trace(const Number& multiplicand, Digit multiplier,
                                     TraceOptions options) {
    if (!options.allow_zero) {
        if (multiplicand.value() == 0) {
            throw std::domain_error("multiplicand must be >= 1");
        }
        if (multiplier.value() == 0) {
            throw std::domain_error("multiplier must be >= 1");
        }
    }

    MultiplicationTrace trace;
    trace.multiplicand = multiplicand;
    trace.multiplier = multiplier.value();

    const std::string& digits = multiplicand.digits();
    std::uint64_t carry = 0;
    std::string accumulator;
    for (std::size_t i = 1; i <= digits.size(); ++i) {
        DigitBlock block;
        block.index = i;
        block.carry_in = carry;
        block.digit = extract_digit(multiplicand, i, DigitOrder::LsbFirst).value();
        block.temp_mult = mult_digits(Digit(static_cast<int>(block.digit)), multiplier);
        block.temp_add = add_small(block.temp_mult, Digit(static_cast<int>(carry)));
        block.result_before = accumulator;
        if (block.temp_add >= 10) {
            block.branch = Branch::GE10;
            block.fd_result = block.temp_add % 10;
            block.carry_out = block.temp_add / 10;
            accumulator = concat_left(Number(*block.fd_result), accumulator);
        } else {
            block.branch = Branch::LT10;
            block.carry_out = 0;
            accumulator = concat_left(Number(block.temp_add), accumulator);
        }
        block.result_after = accumulator;
        carry = block.carry_out;
        trace.blocks.push_back(std::move(block));
    }

    trace.final_carry = carry;
    trace.final_digits = carry > 0 ? concat_left(Number(carry), accumulator) : accumulator;
    trace.final_result = Number(multiplicand.value() * multiplier.value());
    return trace;
}

std::string check_trace(const MultiplicationTrace& trace) {
    const auto& a = trace.multiplicand;
    if (trace.blocks.size() != a.size()) {
        return "block count differs from multiplicand digit count";
    }
    std::uint64_t carry = 0;
    std::string accumulator;
    for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
        const auto& b = trace.blocks[i];
        const std::string where = "block " + std::to_string(i + 1) + ": ";
        if (b.index != i + 1) return where + "index";
        if (b.carry_in != carry) return where + "carry_in does not chain";
        if (b.digit != static_cast<std::uint64_t>(a.digits()[a.size() - 1 - i] - '0')) return where + "digit";
        if (b.temp_mult != b.digit * trace.multiplier) return where + "temp_mult";
        if (b.temp_add != b.carry_in + b.temp_mult) return where + "temp_add";
        if ((b.branch == Branch::GE10) != (b.temp_add >= 10)) return where + "branch";
        if (b.result_before != accumulator) return where + "result_before";
        if (b.branch == Branch::GE10) {
            if (b.fd_result != b.temp_add % 10) return where + "fd_result";
            if (b.carry_out != b.temp_add / 10) return where + "carry_out";
            accumulator = std::to_string(b.temp_add % 10) + accumulator;
        } else {
            if (b.fd_result.has_value()) return where + "fd_result present in LT10 branch";
            if (b.carry_out != 0) return where + "carry_out";
            accumulator = std::to_string(b.temp_add) + accumulator;
        }
        if (b.result_after != accumulator) return where + "result_after";
        carry = b.carry_out;
    }
    if (trace.final_carry != carry) return "final_carry";
    const std::string folded = carry > 0 ? std::to_string(carry) + accumulator : accumulator;
    if (trace.final_digits != folded) return "final_digits";
    if (trace.final_result.value() != a.value() * trace.multiplier) return "final_result";
    return {};
}

Digit extract_digit(const Number& n, std::size_t pos, DigitOrder order) {
    const std::string& digits = n.digits();
    if (pos < 1 || pos > digits.size()) {
        throw std::out_of_range("digit position " + std::to_string(pos) + " outside 1.." +
                                std::to_string(digits.size()));
    }
    const std::size_t at = order == DigitOrder::MsbFirst ? pos - 1 : digits.size() - pos;
    return Digit(digits[at] - '0');
}

std::string concat_left(const Number& left, std::string_view right) {
    std::string out = left.digits();
    out.append(right);
    return out;
}

unsigned mult_digits(Digit a, Digit b) noexcept { return a.value() * b.value(); }

unsigned add_small(unsigned x, Digit y) {
    if (x > 99) {
        throw std::domain_error("add_small: left operand " + std::to_string(x) + " exceeds 99");
    }
    return x + y.value();
}

}  // namespace dal
