#include "dal/arith.hpp"

#include "doctest.h"

#include <random>
#include <string>

using namespace dal;

TEST_CASE("schoolbook_trace reproduces the 5847 x 2 worked example") {
    const auto t = schoolbook_trace(Number(5847), Digit(2));
    REQUIRE(t.blocks.size() == 4);

    const auto& b1 = t.blocks[0];
    CHECK(b1.index == 1);
    CHECK(b1.carry_in == 0);
    CHECK(b1.digit == 7);
    CHECK(b1.temp_mult == 14);
    CHECK(b1.temp_add == 14);
    CHECK(b1.branch == Branch::GE10);
    CHECK(b1.fd_result == 4u);
    CHECK(b1.carry_out == 1);
    CHECK(b1.result_before.empty());
    CHECK(b1.result_after == "4");

    const auto& b2 = t.blocks[1];
    CHECK(b2.carry_in == 1);
    CHECK(b2.digit == 4);
    CHECK(b2.temp_mult == 8);
    CHECK(b2.temp_add == 9);
    CHECK(b2.branch == Branch::LT10);
    CHECK_FALSE(b2.fd_result.has_value());
    CHECK(b2.carry_out == 0);
    CHECK(b2.result_before == "4");
    CHECK(b2.result_after == "94");

    CHECK(t.blocks[3].result_after == "1694");
    CHECK(t.final_carry == 1);
    CHECK(t.final_digits == "11694");
    CHECK(t.final_result.value() == 11694);
    CHECK(check_trace(t).empty());
}

TEST_CASE("schoolbook_trace edge operands") {
    const auto one = schoolbook_trace(Number(1), Digit(1));
    REQUIRE(one.blocks.size() == 1);
    CHECK(one.blocks[0].temp_mult == 1);
    CHECK(one.blocks[0].temp_add == 1);
    CHECK(one.blocks[0].branch == Branch::LT10);
    CHECK(one.final_carry == 0);
    CHECK(one.final_result.value() == 1);

    // 999999 * 9 computed natively.
    CHECK(schoolbook_trace(Number(999999), Digit(9)).final_result.value() == 8999991);

    // Zero temp_add in the middle concatenates a literal "0".
    const auto mid_zero = schoolbook_trace(Number(508), Digit(2));
    CHECK(mid_zero.blocks[1].temp_add == 1);
    CHECK(mid_zero.final_digits == "1016");
    const auto zero_digit = schoolbook_trace(Number(1002), Digit(3));
    CHECK(zero_digit.blocks[1].temp_add == 0);
    CHECK(zero_digit.blocks[1].result_after == "06");
    CHECK(zero_digit.final_digits == "3006");
}

TEST_CASE("zero operands are rejected unless enabled") {
    CHECK_THROWS_AS(schoolbook_trace(Number(0), Digit(3)), std::domain_error);
    CHECK_THROWS_AS(schoolbook_trace(Number(5847), Digit(0)), std::domain_error);

    const auto t = schoolbook_trace(Number(5847), Digit(0), {.allow_zero = true});
    CHECK(t.final_digits == "0000");
    CHECK(t.final_result.value() == 0);
    CHECK(check_trace(t).empty());
}

TEST_CASE("extract_digit in both orders") {
    CHECK(extract_digit(Number(393721), 3, DigitOrder::MsbFirst).value() == 3);
    CHECK(extract_digit(Number(5847), 1, DigitOrder::LsbFirst).value() == 7);
    CHECK(extract_digit(Number(7), 1, DigitOrder::MsbFirst).value() == 7);
    CHECK(extract_digit(Number(7), 1, DigitOrder::LsbFirst).value() == 7);
    CHECK_THROWS_AS(extract_digit(Number(5847), 5, DigitOrder::MsbFirst), std::out_of_range);
    CHECK_THROWS_AS(extract_digit(Number(5847), 0, DigitOrder::LsbFirst), std::out_of_range);
}

TEST_CASE("extract_digit orders mirror each other") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> dist(1, 999999);
    for (int i = 0; i < 2000; ++i) {
        const Number n(dist(rng));
        const std::size_t len = n.size();
        for (std::size_t pos = 1; pos <= len; ++pos) {
            CHECK(extract_digit(n, pos, DigitOrder::MsbFirst) ==
                  extract_digit(n, len - pos + 1, DigitOrder::LsbFirst));
        }
    }
}

TEST_CASE("concat_left, mult_digits, add_small") {
    CHECK(concat_left(Number(16), "375347") == "16375347");
    CHECK(concat_left(Number(4), "") == "4");
    CHECK(concat_left(Number(1), "1694") == "11694");

    CHECK(mult_digits(Digit(6), Digit(8)) == 48);
    CHECK(mult_digits(Digit(0), Digit(9)) == 0);
    CHECK(mult_digits(Digit(9), Digit(9)) == 81);

    CHECK(add_small(12, Digit(6)) == 18);
    CHECK(add_small(0, Digit(0)) == 0);
    CHECK(add_small(99, Digit(9)) == 108);
    CHECK_THROWS_AS(add_small(100, Digit(1)), std::domain_error);
}

TEST_CASE("Digit and Number validation") {
    CHECK_THROWS_AS(Digit(10), std::domain_error);
    CHECK_THROWS_AS(Digit(-1), std::domain_error);
    CHECK(Number::parse("0").value() == 0);
    CHECK(Number::parse("5847").digits() == "5847");
    CHECK_THROWS_AS(Number::parse("0123"), std::invalid_argument);
    CHECK_THROWS_AS(Number::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Number::parse("12a"), std::invalid_argument);
    CHECK_THROWS_AS(Number::parse("99999999999999999999999"), std::out_of_range);
}

// Independent oracle: the product's digits read right to left, with carries
// derived from native arithmetic on suffixes of the multiplicand.
TEST_CASE("trace invariants hold against native arithmetic") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> a_dist(1, 999999);
    std::uniform_int_distribution<int> m_dist(1, 9);
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t a = a_dist(rng);
        const int m = m_dist(rng);
        const auto t = schoolbook_trace(Number(a), Digit(m));
        REQUIRE(t.final_result.value() == a * static_cast<std::uint64_t>(m));
        REQUIRE(t.final_digits == std::to_string(a * m));

        std::uint64_t pow10 = 1;
        for (std::size_t k = 0; k < t.blocks.size(); ++k) {
            const auto& b = t.blocks[k];
            const std::uint64_t suffix = a % (pow10 * 10);
            const std::uint64_t partial = suffix * m;
            // carry_out is what overflows the k+1 low digits of the product.
            REQUIRE(b.carry_out == partial / (pow10 * 10));
            REQUIRE(b.carry_out <= 9);
            REQUIRE(b.result_after.size() == b.result_before.size() + 1);
            REQUIRE(b.result_after.substr(1) == b.result_before);
            if (k > 0) REQUIRE(b.carry_in == t.blocks[k - 1].carry_out);
            pow10 *= 10;
        }
        REQUIRE(check_trace(t).empty());
    }
}
