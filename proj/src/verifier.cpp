#include "dal/verifier.hpp"

#include <algorithm>
#include <random>

namespace dal {

namespace {

using Kind = LineKind;
constexpr auto kA = ErrorKind::ArithmeticError;
constexpr auto kS = ErrorKind::StateMismatch;

// Which error a wrong value in each field of a line represents.
std::vector<ErrorKind> field_roles(LineKind kind) {
    switch (kind) {
        case Kind::Header: return {kS, kS, kS, kS};
        case Kind::CarryInit: return {kS};
        case Kind::DigitExtract: return {kS, kS, kA};
        case Kind::DigitMult: return {kS, kS, kS, kS, kS, kS, kA};
        case Kind::CarryAdd: return {kS, kS, kA};
        case Kind::CompareGE10:
        case Kind::CompareLT10: return {kS};
        case Kind::FirstDigit: return {kS, kA};
        case Kind::ConcatGE10: return {kS, kS};
        case Kind::ConcatLT10: return {kS};
        case Kind::ConcatResult: return {kA};
        case Kind::CarryFromSecondDigit: return {kA, kS};
        case Kind::FinalCarryPositive:
        case Kind::FinalCarryZero: return {kS};
        case Kind::FinalCarryConcat: return {kS, kS};
        case Kind::FinalConcatResult: return {kA};
        case Kind::FinalResult: return {ErrorKind::FinalMismatch};
        case Kind::Blank: return {};
    }
    return {};
}

bool is_compare(LineKind k) { return k == Kind::CompareGE10 || k == Kind::CompareLT10; }

enum class Op { Match, Missing, Extra };

struct Step {
    Op op;
    std::size_t expected;
    std::size_t parsed;
};

// Aligns the two kind sequences. Identical shapes (the common case) align
// positionally; otherwise a longest-common-subsequence alignment is used.
std::vector<Step> align(const std::vector<TraceLine>& expected, const std::vector<ParsedLine>& parsed) {
    const std::size_t n = expected.size();
    const std::size_t m = parsed.size();
    std::vector<Step> steps;

    bool same_shape = n == m;
    for (std::size_t i = 0; same_shape && i < n; ++i) {
        same_shape = expected[i].kind == parsed[i].kind;
    }
    if (same_shape) {
        for (std::size_t i = 0; i < n; ++i) steps.push_back({Op::Match, i, i});
        return steps;
    }

    // lcs[i][j]: LCS length of expected[i..] and parsed[j..].
    std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
    const auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            lcs[at(i, j)] = expected[i].kind == parsed[j].kind
                                ? lcs[at(i + 1, j + 1)] + 1
                                : std::max(lcs[at(i + 1, j)], lcs[at(i, j + 1)]);
        }
    }
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && expected[i].kind == parsed[j].kind &&
            lcs[at(i, j)] == lcs[at(i + 1, j + 1)] + 1) {
            steps.push_back({Op::Match, i++, j++});
        } else if (j == m || (i < n && lcs[at(i + 1, j)] >= lcs[at(i, j + 1)])) {
            steps.push_back({Op::Missing, i++, j});
        } else {
            steps.push_back({Op::Extra, i, j++});
        }
    }
    return steps;
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Malformed: return "Malformed";
        case ErrorKind::ArithmeticError: return "ArithmeticError";
        case ErrorKind::StateMismatch: return "StateMismatch";
        case ErrorKind::BranchError: return "BranchError";
        case ErrorKind::OrderError: return "OrderError";
        case ErrorKind::FinalMismatch: return "FinalMismatch";
    }
    return "Unknown";
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::Valid: return "Valid";
        case Verdict::Invalid: return "Invalid";
        case Verdict::Unparseable: return "Unparseable";
    }
    return "Unknown";
}

bool score_final(std::string_view text, const Number& a, Digit m) {
    const auto digits = find_final_result(text);
    return digits && *digits == std::to_string(a.value() * m.value());
}

VerificationReport verify_trace(std::string_view text, const Number& a, Digit m) {
    VerificationReport report;
    report.final_correct = score_final(text, a, m);

    const auto outcome = parse_trace(text, ParseMode::Lenient);
    const auto oracle = schoolbook_trace(a, m, {.allow_zero = true});
    std::vector<TraceLine> expected = trace_lines(oracle);
    std::erase_if(expected, [](const TraceLine& l) { return l.kind == Kind::Blank; });
    const auto& parsed = outcome.lines;

    report.steps_checked = expected.size();
    const std::size_t end_line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) +
        (text.empty() || text.back() == '\n' ? 0 : 1);

    const auto set_error = [&](std::size_t line, ErrorKind kind, std::string detail) {
        if (!report.first_error) report.first_error = StepError{line, kind, std::move(detail)};
    };

    const auto steps = align(expected, parsed);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const Step& step = steps[s];
        if (step.op == Op::Match) {
            const auto& e = expected[step.expected];
            const auto& p = parsed[step.parsed];
            if (e.fields == p.fields) {
                ++report.steps_correct;
                continue;
            }
            const auto roles = field_roles(e.kind);
            for (std::size_t f = 0; f < e.fields.size(); ++f) {
                if (f >= p.fields.size() || e.fields[f] != p.fields[f]) {
                    set_error(p.line_number, roles.at(f),
                              std::string(to_string(e.kind)) + " field " + std::to_string(f) +
                                  ": expected '" + e.fields[f] + "', got '" +
                                  (f < p.fields.size() ? p.fields[f] : std::string()) + "'");
                    break;
                }
            }
            continue;
        }
        if (report.first_error) continue;

        const std::size_t next_line = step.parsed < parsed.size() ? parsed[step.parsed].line_number : end_line;
        const std::size_t prev_line = step.parsed > 0 ? parsed[step.parsed - 1].line_number : 0;
        const bool has_expected = step.expected < expected.size();
        const bool has_parsed = step.parsed < parsed.size();

        if (has_expected && has_parsed && is_compare(expected[step.expected].kind) &&
            is_compare(parsed[step.parsed].kind)) {
            set_error(parsed[step.parsed].line_number, ErrorKind::BranchError,
                      "expected " + std::string(to_string(expected[step.expected].kind)) + ", got " +
                          std::string(to_string(parsed[step.parsed].kind)));
            continue;
        }
        if (step.op == Op::Missing) {
            const auto malformed = std::find_if(
                outcome.issues.begin(), outcome.issues.end(), [&](const ParseIssue& issue) {
                    return issue.kind == IssueKind::Malformed && issue.line_number > prev_line &&
                           issue.line_number < next_line;
                });
            if (malformed != outcome.issues.end()) {
                set_error(malformed->line_number, ErrorKind::Malformed, malformed->text);
            } else {
                set_error(next_line, ErrorKind::OrderError,
                          "missing " + std::string(to_string(expected[step.expected].kind)));
            }
        } else {
            set_error(parsed[step.parsed].line_number, ErrorKind::OrderError,
                      "unexpected " + std::string(to_string(parsed[step.parsed].kind)));
        }
    }

    if (!outcome.trace) {
        report.verdict = Verdict::Unparseable;
        return report;
    }
    if (!report.first_error && !report.final_correct) {
        // Reachable only when the oracle keeps leading zeros (zero operands).
        set_error(parsed.back().line_number, ErrorKind::FinalMismatch, "final_result differs from a x m");
    }
    report.verdict = report.first_error ? Verdict::Invalid : Verdict::Valid;
    return report;
}

nlohmann::json to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(report.verdict);
    j["final_correct"] = report.final_correct;
    if (report.first_error) {
        j["first_error"] = {{"line_number", report.first_error->line_number},
                            {"kind", to_string(report.first_error->kind)},
                            {"detail", report.first_error->detail}};
    } else {
        j["first_error"] = nullptr;
    }
    j["steps_checked"] = report.steps_checked;
    j["steps_correct"] = report.steps_correct;
    return j;
}

std::vector<FieldSelector> mutable_fields(const MultiplicationTrace& trace) {
    std::vector<FieldSelector> out;
    const auto lines = trace_lines(trace);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t f = 0; f < lines[i].fields.size(); ++f) {
            if (!lines[i].fields[f].empty()) out.push_back({i + 1, f});
        }
    }
    return out;
}

std::string inject_fault(const MultiplicationTrace& trace, FieldSelector selector, std::uint64_t seed) {
    auto lines = trace_lines(trace);
    if (selector.line_number < 1 || selector.line_number > lines.size()) {
        throw std::out_of_range("fault selector line " + std::to_string(selector.line_number) +
                                " outside 1.." + std::to_string(lines.size()));
    }
    auto& fields = lines[selector.line_number - 1].fields;
    if (selector.field >= fields.size() || fields[selector.field].empty()) {
        throw std::out_of_range("fault selector field " + std::to_string(selector.field) +
                                " does not address a numeric value on line " +
                                std::to_string(selector.line_number));
    }

    std::string& value = fields[selector.field];
    std::mt19937_64 rng(seed);
    if (value.size() == 1) {
        const int current = value[0] - '0';
        int pick = std::uniform_int_distribution<int>(0, 8)(rng);
        if (pick >= current) ++pick;
        value = std::string(1, static_cast<char>('0' + pick));
    } else {
        std::uniform_int_distribution<int> lead(1, 9);
        std::uniform_int_distribution<int> rest(0, 9);
        std::string mutated;
        do {
            mutated.assign(1, static_cast<char>('0' + lead(rng)));
            while (mutated.size() < value.size()) mutated.push_back(static_cast<char>('0' + rest(rng)));
        } while (mutated == value);
        value = std::move(mutated);
    }
    return render_lines(lines);
}

}  // namespace dal
