#include "dal/verifier.hpp"

#include "doctest.h"

#include <random>
#include <sstream>

using namespace dal;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

const auto kTrace = schoolbook_trace(Number(5847), Digit(2));

}  // namespace

TEST_CASE("valid trace verifies") {
    const auto r = verify_trace(render_trace(kTrace), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Valid);
    CHECK(r.final_correct);
    CHECK_FALSE(r.first_error.has_value());
    CHECK(r.steps_checked == r.steps_correct);
    CHECK(r.steps_checked > 30);
}

TEST_CASE("changed final line is a FinalMismatch") {
    auto lines = lines_of(render_trace(kTrace));
    lines.back() = "the final_result is 11693";
    const auto r = verify_trace(join(lines), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    CHECK_FALSE(r.final_correct);
    REQUIRE(r.first_error.has_value());
    CHECK(r.first_error->kind == ErrorKind::FinalMismatch);
    CHECK(r.first_error->line_number == lines.size());
}

TEST_CASE("empty and sentinel-free text is unparseable") {
    const auto r = verify_trace("", Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Unparseable);
    CHECK_FALSE(r.final_correct);

    auto lines = lines_of(render_trace(kTrace));
    lines.resize(20);
    CHECK(verify_trace(join(lines), Number(5847), Digit(2)).verdict == Verdict::Unparseable);
}

TEST_CASE("trace for a different question is invalid at the header") {
    const auto r = verify_trace(render_trace(kTrace), Number(5848), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    REQUIRE(r.first_error.has_value());
    CHECK(r.first_error->line_number == 1);
    CHECK(r.first_error->kind == ErrorKind::StateMismatch);
}

TEST_CASE("score_final ignores intermediate errors") {
    auto lines = lines_of(render_trace(kTrace));
    lines[4] = "Add the multiplication result to the carry: temp_add=carry+temp_mult=0+14=15";
    const auto text = join(lines);
    CHECK(score_final(text, Number(5847), Digit(2)));
    const auto r = verify_trace(text, Number(5847), Digit(2));
    CHECK(r.final_correct);
    CHECK(r.verdict == Verdict::Invalid);
    CHECK(r.first_error->kind == ErrorKind::ArithmeticError);
    CHECK(r.first_error->line_number == 5);

    CHECK(score_final(render_trace(kTrace), Number(5847), Digit(2)));
    CHECK_FALSE(score_final("the answer is 11694", Number(5847), Digit(2)));
}

TEST_CASE("wrong comparison direction is a BranchError") {
    auto lines = lines_of(render_trace(kTrace));
    lines[5] = "compare the addition result to 10: temp_add=14<10";
    const auto r = verify_trace(join(lines), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    REQUIRE(r.first_error.has_value());
    CHECK(r.first_error->kind == ErrorKind::BranchError);
    CHECK(r.first_error->line_number == 6);
}

TEST_CASE("missing and reordered lines are OrderErrors") {
    auto lines = lines_of(render_trace(kTrace));
    auto missing = lines;
    missing.erase(missing.begin() + 3);  // DigitMult of block 1
    const auto r = verify_trace(join(missing), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    REQUIRE(r.first_error.has_value());
    CHECK(r.first_error->kind == ErrorKind::OrderError);
    CHECK(r.first_error->line_number == 4);
    CHECK(r.steps_correct == r.steps_checked - 1);

    auto duplicated = lines;
    duplicated.insert(duplicated.begin() + 2, lines[2]);
    const auto d = verify_trace(join(duplicated), Number(5847), Digit(2));
    CHECK(d.verdict == Verdict::Invalid);
    CHECK(d.first_error->kind == ErrorKind::OrderError);
}

TEST_CASE("malformed line surfaces as Malformed") {
    auto lines = lines_of(render_trace(kTrace));
    lines[3] = "multiply digit 1 of 5847 which is 7 by 2: temp_mult=7*2=fourteen";
    const auto r = verify_trace(join(lines), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    REQUIRE(r.first_error.has_value());
    CHECK(r.first_error->kind == ErrorKind::Malformed);
    CHECK(r.first_error->line_number == 4);
}

TEST_CASE("chatter lines do not invalidate a trace") {
    auto lines = lines_of(render_trace(kTrace));
    lines.insert(lines.begin() + 1, "Sure, here is the computation:");
    lines.push_back("Hope this helps!");
    const auto r = verify_trace(join(lines), Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Valid);
}

TEST_CASE("globally consistent but wrong traces are caught") {
    // A self-consistent trace for 5847 x 3 is not a valid answer to 5847 x 2.
    const auto wrong = schoolbook_trace(Number(5847), Digit(3));
    auto text = render_trace(wrong);
    const auto r = verify_trace(text, Number(5847), Digit(2));
    CHECK(r.verdict == Verdict::Invalid);
    CHECK_FALSE(r.final_correct);
}

TEST_CASE("inject_fault targets") {
    const auto fields = mutable_fields(kTrace);
    CHECK(std::find(fields.begin(), fields.end(), FieldSelector{8, 1}) == fields.end());  // empty temp_result

    // block-1 temp_mult: line 4, field 6
    const auto m1 = inject_fault(kTrace, {4, 6}, 1);
    CHECK(m1 != render_trace(kTrace));
    const auto r1 = verify_trace(m1, Number(5847), Digit(2));
    CHECK(r1.verdict == Verdict::Invalid);
    REQUIRE(r1.first_error.has_value());
    CHECK(r1.first_error->kind == ErrorKind::ArithmeticError);
    CHECK(r1.first_error->line_number == 4);

    // block-2 carry_in: line 12 ("carry=1")
    const auto m2 = inject_fault(kTrace, {12, 0}, 2);
    const auto r2 = verify_trace(m2, Number(5847), Digit(2));
    REQUIRE(r2.first_error.has_value());
    CHECK(r2.first_error->kind == ErrorKind::StateMismatch);
    CHECK(r2.first_error->line_number == 12);

    CHECK_THROWS_AS(inject_fault(kTrace, {0, 0}, 1), std::out_of_range);
    CHECK_THROWS_AS(inject_fault(kTrace, {11, 0}, 1), std::out_of_range);  // blank line
    CHECK_THROWS_AS(inject_fault(kTrace, {8, 1}, 1), std::out_of_range);   // empty accumulator
    CHECK_THROWS_AS(inject_fault(kTrace, {4, 7}, 1), std::out_of_range);
    CHECK_THROWS_AS(inject_fault(kTrace, {1000, 0}, 1), std::out_of_range);
}

TEST_CASE("every single-field mutation is detected at the mutated line") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::uint64_t> a_dist(1000, 999999);
    std::uniform_int_distribution<int> m_dist(1, 9);
    for (int i = 0; i < 60; ++i) {
        const Number a(a_dist(rng));
        const Digit m(m_dist(rng));
        const auto t = schoolbook_trace(a, m);
        const auto clean = verify_trace(render_trace(t), a, m);
        REQUIRE(clean.verdict == Verdict::Valid);
        for (const auto& sel : mutable_fields(t)) {
            const auto text = inject_fault(t, sel, rng());
            const auto r = verify_trace(text, a, m);
            REQUIRE(r.verdict == Verdict::Invalid);
            REQUIRE(r.first_error.has_value());
            REQUIRE(r.first_error->line_number <= sel.line_number);
            REQUIRE(r.steps_correct < clean.steps_correct);
            REQUIRE(r.final_correct == score_final(text, a, m));
        }
    }
}

TEST_CASE("report JSON carries the documented fields") {
    auto lines = lines_of(render_trace(kTrace));
    lines.back() = "the final_result is 11693";
    const auto j = to_json(verify_trace(join(lines), Number(5847), Digit(2)));
    CHECK(j.at("verdict") == "Invalid");
    CHECK(j.at("final_correct") == false);
    CHECK(j.at("first_error").at("kind") == "FinalMismatch");
    CHECK(j.at("first_error").at("line_number") == lines.size());
    CHECK(j.contains("steps_checked"));
    CHECK(j.contains("steps_correct"));
}
