#include "dal/trace_text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace dal {

namespace {

// Render forms. "{}" is a non-empty digit run, "{?}" a possibly empty one.
struct TemplateDef {
    LineKind kind;
    std::string_view name;
    std::string_view pattern;
};

constexpr std::array<TemplateDef, 18> kTemplates{{
    {LineKind::Header, "Header", "multiplying {} by {}: {}*{}="},
    {LineKind::CarryInit, "CarryInit", "carry={}"},
    {LineKind::DigitExtract, "DigitExtract", "digit {} of {} is {}"},
    {LineKind::DigitMult, "DigitMult",
     "multiply digit {} of {} which is {} by {}: temp_mult={}*{}={}"},
    {LineKind::CarryAdd, "CarryAdd",
     "Add the multiplication result to the carry: temp_add=carry+temp_mult={}+{}={}"},
    {LineKind::CompareGE10, "CompareGE10", "compare the addition result to 10: temp_add={}>=10"},
    {LineKind::CompareLT10, "CompareLT10", "compare the addition result to 10: temp_add={}<10"},
    {LineKind::FirstDigit, "FirstDigit", "the first digit of temp_add={} is fd_result={}"},
    {LineKind::ConcatGE10, "ConcatGE10",
     "first digit of temp_add which is {} is concatenated to the left of temp_result={?}"},
    {LineKind::ConcatLT10, "ConcatLT10",
     "temp_add is concatenated to the left of temporary_result={?}"},
    {LineKind::ConcatResult, "ConcatResult", "the result of the concatenation is {}"},
    {LineKind::CarryFromSecondDigit, "CarryFromSecondDigit",
     "the second digit of temp_add is {} which will be the value of the carry: carry={}"},
    {LineKind::FinalCarryPositive, "FinalCarryPositive", "final carry={}>0"},
    {LineKind::FinalCarryZero, "FinalCarryZero", "final carry={}"},
    {LineKind::FinalCarryConcat, "FinalCarryConcat",
     "the final carry which is {} is concatenated to the left of the final result which is {}"},
    {LineKind::FinalConcatResult, "FinalConcatResult", "the result of the concatenation is {}"},
    {LineKind::FinalResult, "FinalResult", "the final_result is {}"},
    {LineKind::Blank, "Blank", ""},
}};

const TemplateDef& def_of(LineKind kind) {
    for (const auto& d : kTemplates) {
        if (d.kind == kind) return d;
    }
    throw std::logic_error("no template for line kind");
}

// Captured digit runs longer than this cannot be held in a 64-bit field.
constexpr std::size_t kMaxFieldDigits = 18;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }
bool is_operator(char c) { return c == '=' || c == '*' || c == '+' || c == '<' || c == '>'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct Segment {
    bool field = false;
    bool may_be_empty = false;
    std::string literal;
};

struct CompiledTemplate {
    LineKind kind;
    std::vector<Segment> segments;
    std::size_t field_count = 0;
    std::string prefix;  // literal text before the first field
};

CompiledTemplate compile(const TemplateDef& def) {
    CompiledTemplate out{def.kind, {}, 0, {}};
    const std::string norm = normalize_line(def.pattern);
    std::string literal;
    for (std::size_t i = 0; i < norm.size();) {
        if (norm.compare(i, 2, "{}") == 0 || norm.compare(i, 3, "{?}") == 0) {
            const bool optional = norm[i + 1] == '?';
            if (!literal.empty()) out.segments.push_back({false, false, std::move(literal)});
            literal.clear();
            out.segments.push_back({true, optional, {}});
            ++out.field_count;
            i += optional ? 3 : 2;
        } else {
            literal.push_back(norm[i++]);
        }
    }
    if (!literal.empty()) out.segments.push_back({false, false, std::move(literal)});
    if (!out.segments.empty() && !out.segments.front().field) {
        out.prefix = out.segments.front().literal;
    }
    return out;
}

const std::vector<CompiledTemplate>& matchers() {
    // FinalConcatResult shares ConcatResult's text and Blank is handled
    // separately, so neither is matched directly.
    static const std::vector<CompiledTemplate> compiled = [] {
        std::vector<CompiledTemplate> v;
        for (const auto& d : kTemplates) {
            if (d.kind == LineKind::FinalConcatResult || d.kind == LineKind::Blank) continue;
            v.push_back(compile(d));
        }
        return v;
    }();
    return compiled;
}

std::optional<std::vector<std::string>> match(const CompiledTemplate& t, std::string_view line) {
    std::vector<std::string> fields;
    fields.reserve(t.field_count);
    std::size_t pos = 0;
    for (const auto& seg : t.segments) {
        if (!seg.field) {
            if (line.substr(pos, seg.literal.size()) != seg.literal) return std::nullopt;
            pos += seg.literal.size();
            continue;
        }
        std::size_t end = pos;
        while (end < line.size() && is_digit(line[end])) ++end;
        if (end == pos && !seg.may_be_empty) return std::nullopt;
        if (end - pos > kMaxFieldDigits) return std::nullopt;
        fields.emplace_back(line.substr(pos, end - pos));
        pos = end;
    }
    if (pos != line.size()) return std::nullopt;
    return fields;
}

struct Classified {
    std::optional<LineKind> kind;  // nullopt: no template matched
    std::vector<std::string> fields;
    bool near_miss = false;  // starts like a template but does not match
};

Classified classify(std::string_view normalized) {
    Classified out;
    for (const auto& t : matchers()) {
        if (auto f = match(t, normalized)) {
            out.kind = t.kind;
            out.fields = std::move(*f);
            return out;
        }
    }
    for (const auto& t : matchers()) {
        if (t.prefix.size() >= 6 && normalized.starts_with(t.prefix)) {
            out.near_miss = true;
            break;
        }
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

bool is_footer(LineKind k) {
    return k == LineKind::FinalCarryPositive || k == LineKind::FinalCarryZero ||
           k == LineKind::FinalCarryConcat || k == LineKind::FinalConcatResult ||
           k == LineKind::FinalResult;
}

// ---------------------------------------------------------------------------
// Block assembly shared by both parse modes.

enum Slot : std::size_t {
    kCarryIn,
    kExtract,
    kMult,
    kAdd,
    kCompare,
    kFirstDigit,
    kCarryReset,
    kConcat,
    kConcatResult,
    kSecondDigit,
    kSlotCount
};

constexpr std::array<int, kSlotCount> kSlotRank{0, 1, 2, 3, 4, 5, 5, 6, 7, 8};

constexpr std::array<std::string_view, kSlotCount> kSlotNames{
    "CarryInit",   "DigitExtract", "DigitMult",  "CarryAdd",     "Compare",
    "FirstDigit",  "CarryInit",    "Concat",     "ConcatResult", "CarryFromSecondDigit"};

struct BlockDraft {
    std::array<const ParsedLine*, kSlotCount> slots{};
    int max_rank = -1;
    std::optional<Branch> branch;

    bool empty() const { return max_rank < 0; }
};

// Places `line` into the current draft, or returns false when it must open a
// new block.
bool place(BlockDraft& draft, const ParsedLine& line) {
    Slot slot;
    switch (line.kind) {
        case LineKind::CarryInit:
            slot = (draft.branch == Branch::LT10 && draft.max_rank >= 4 && draft.max_rank < 5)
                       ? kCarryReset
                       : kCarryIn;
            break;
        case LineKind::DigitExtract: slot = kExtract; break;
        case LineKind::DigitMult: slot = kMult; break;
        case LineKind::CarryAdd: slot = kAdd; break;
        case LineKind::CompareGE10:
        case LineKind::CompareLT10: slot = kCompare; break;
        case LineKind::FirstDigit: slot = kFirstDigit; break;
        case LineKind::ConcatGE10:
        case LineKind::ConcatLT10: slot = kConcat; break;
        case LineKind::ConcatResult: slot = kConcatResult; break;
        case LineKind::CarryFromSecondDigit: slot = kSecondDigit; break;
        default: return true;
    }
    if (kSlotRank[slot] <= draft.max_rank) return false;
    draft.slots[slot] = &line;
    draft.max_rank = kSlotRank[slot];
    if (line.kind == LineKind::CompareGE10) draft.branch = Branch::GE10;
    if (line.kind == LineKind::CompareLT10) draft.branch = Branch::LT10;
    return true;
}

const std::string& field(const ParsedLine* line, std::size_t i) {
    static const std::string empty;
    return line != nullptr && i < line->fields.size() ? line->fields[i] : empty;
}

DigitBlock build_block(const BlockDraft& draft, std::vector<ParseIssue>& issues,
                       std::size_t fallback_line) {
    const auto& s = draft.slots;
    const Branch branch = draft.branch.value_or(s[kFirstDigit] || s[kSecondDigit]
                                                    ? Branch::GE10
                                                    : Branch::LT10);

    std::vector<Slot> required{kCarryIn, kExtract, kMult, kAdd, kCompare, kConcat, kConcatResult};
    if (branch == Branch::GE10) {
        required.push_back(kFirstDigit);
        required.push_back(kSecondDigit);
    } else {
        required.push_back(kCarryReset);
    }
    for (Slot slot : required) {
        if (s[slot] != nullptr) continue;
        std::size_t at = fallback_line;
        for (std::size_t k = 0; k < kSlotCount; ++k) {
            if (s[k] != nullptr && kSlotRank[k] > kSlotRank[slot]) {
                at = std::min(at, s[k]->line_number);
            }
        }
        issues.push_back({at, IssueKind::Missing, std::string(kSlotNames[slot])});
    }

    DigitBlock b;
    b.index = static_cast<std::size_t>(to_u64(field(s[kExtract], 0)));
    b.carry_in = to_u64(field(s[kCarryIn], 0));
    b.digit = to_u64(field(s[kExtract], 2));
    b.temp_mult = to_u64(field(s[kMult], 6));
    b.temp_add = to_u64(field(s[kAdd], 2));
    b.branch = branch;
    if (branch == Branch::GE10) {
        b.fd_result = to_u64(field(s[kFirstDigit], 1));
        b.carry_out = to_u64(field(s[kSecondDigit], 0));
    } else {
        b.carry_out = to_u64(field(s[kCarryReset], 0));
    }
    if (s[kConcat] != nullptr) b.result_before = s[kConcat]->fields.back();
    b.result_after = field(s[kConcatResult], 0);
    return b;
}

// Assembles a trace from recognized lines. `lines` must start at the header
// and end at or before the first FinalResult line.
std::optional<MultiplicationTrace> assemble(const std::vector<ParsedLine>& lines,
                                            std::vector<ParseIssue>& issues,
                                            std::size_t end_line) {
    const ParsedLine* header = nullptr;
    const ParsedLine* final_result = nullptr;
    const ParsedLine* final_carry = nullptr;
    const ParsedLine* final_concat = nullptr;
    const ParsedLine* final_fold = nullptr;
    std::vector<BlockDraft> drafts;
    std::vector<std::size_t> draft_end;
    bool in_footer = false;

    for (const auto& line : lines) {
        if (line.kind == LineKind::Header) {
            if (header == nullptr) header = &line;
            continue;
        }
        if (is_footer(line.kind)) {
            in_footer = true;
            switch (line.kind) {
                case LineKind::FinalCarryPositive:
                case LineKind::FinalCarryZero:
                    if (!final_carry) final_carry = &line;
                    break;
                case LineKind::FinalCarryConcat:
                    if (!final_fold) final_fold = &line;
                    break;
                case LineKind::FinalConcatResult:
                    if (!final_concat) final_concat = &line;
                    break;
                default:
                    final_result = &line;
                    break;
            }
            continue;
        }
        if (in_footer) continue;  // reported as Unexpected by the caller
        if (drafts.empty() || !place(drafts.back(), line)) {
            if (!drafts.empty()) draft_end.push_back(line.line_number);
            drafts.emplace_back();
            place(drafts.back(), line);
        }
    }
    const std::size_t footer_line =
        final_carry ? final_carry->line_number
                    : (final_result ? final_result->line_number : end_line);
    if (!drafts.empty()) draft_end.push_back(footer_line);

    if (header == nullptr) issues.push_back({1, IssueKind::Missing, "Header"});
    if (drafts.empty()) issues.push_back({footer_line, IssueKind::Missing, "block"});
    if (final_result == nullptr) issues.push_back({end_line, IssueKind::Missing, "FinalResult"});
    if (header == nullptr || drafts.empty() || final_result == nullptr) return std::nullopt;

    MultiplicationTrace trace;
    trace.multiplicand = Number(to_u64(header->fields[0]));
    trace.multiplier = to_u64(header->fields[1]);
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        trace.blocks.push_back(build_block(drafts[i], issues, draft_end[i]));
    }
    if (final_carry == nullptr) {
        issues.push_back({final_result->line_number, IssueKind::Missing, "FinalCarry"});
    } else {
        trace.final_carry = to_u64(final_carry->fields[0]);
        if (final_carry->kind == LineKind::FinalCarryPositive) {
            if (!final_fold) {
                issues.push_back({final_result->line_number, IssueKind::Missing, "FinalCarryConcat"});
            }
            if (!final_concat) {
                issues.push_back({final_result->line_number, IssueKind::Missing, "FinalConcatResult"});
            }
        }
    }
    trace.final_digits = final_concat ? final_concat->fields[0] : trace.blocks.back().result_after;
    trace.final_result = Number(to_u64(final_result->fields[0]));
    return trace;
}

// ---------------------------------------------------------------------------
// Strict grammar.

enum class State {
    Header,
    BlockCarry,
    Extract,
    Mult,
    Add,
    Compare,
    GeFirst,
    GeConcat,
    GeResult,
    GeCarry,
    LtCarry,
    LtConcat,
    LtResult,
    BlockEnd,
    FooterFold,
    FooterResult,
    Final,
    Done,
};

// Returns the next state, or nullopt if `kind` is not allowed in `state`.
std::optional<State> advance(State state, LineKind kind) {
    using K = LineKind;
    switch (state) {
        case State::Header: return kind == K::Header ? std::optional(State::BlockCarry) : std::nullopt;
        case State::BlockCarry: return kind == K::CarryInit ? std::optional(State::Extract) : std::nullopt;
        case State::Extract: return kind == K::DigitExtract ? std::optional(State::Mult) : std::nullopt;
        case State::Mult: return kind == K::DigitMult ? std::optional(State::Add) : std::nullopt;
        case State::Add: return kind == K::CarryAdd ? std::optional(State::Compare) : std::nullopt;
        case State::Compare:
            if (kind == K::CompareGE10) return State::GeFirst;
            if (kind == K::CompareLT10) return State::LtCarry;
            return std::nullopt;
        case State::GeFirst: return kind == K::FirstDigit ? std::optional(State::GeConcat) : std::nullopt;
        case State::GeConcat: return kind == K::ConcatGE10 ? std::optional(State::GeResult) : std::nullopt;
        case State::GeResult: return kind == K::ConcatResult ? std::optional(State::GeCarry) : std::nullopt;
        case State::GeCarry:
            return kind == K::CarryFromSecondDigit ? std::optional(State::BlockEnd) : std::nullopt;
        case State::LtCarry: return kind == K::CarryInit ? std::optional(State::LtConcat) : std::nullopt;
        case State::LtConcat: return kind == K::ConcatLT10 ? std::optional(State::LtResult) : std::nullopt;
        case State::LtResult: return kind == K::ConcatResult ? std::optional(State::BlockEnd) : std::nullopt;
        case State::BlockEnd:
            if (kind == K::CarryInit) return State::Extract;
            if (kind == K::FinalCarryPositive) return State::FooterFold;
            if (kind == K::FinalCarryZero) return State::Final;
            return std::nullopt;
        case State::FooterFold:
            return kind == K::FinalCarryConcat ? std::optional(State::FooterResult) : std::nullopt;
        case State::FooterResult:
            return kind == K::FinalConcatResult ? std::optional(State::Final) : std::nullopt;
        case State::Final: return kind == K::FinalResult ? std::optional(State::Done) : std::nullopt;
        case State::Done: return std::nullopt;
    }
    return std::nullopt;
}

std::string_view expected_in(State state) {
    switch (state) {
        case State::Header: return "Header";
        case State::BlockCarry:
        case State::LtCarry: return "CarryInit";
        case State::Extract: return "DigitExtract";
        case State::Mult: return "DigitMult";
        case State::Add: return "CarryAdd";
        case State::Compare: return "CompareGE10 or CompareLT10";
        case State::GeFirst: return "FirstDigit";
        case State::GeConcat: return "ConcatGE10";
        case State::GeResult:
        case State::LtResult: return "ConcatResult";
        case State::GeCarry: return "CarryFromSecondDigit";
        case State::LtConcat: return "ConcatLT10";
        case State::BlockEnd: return "CarryInit or final carry";
        case State::FooterFold: return "FinalCarryConcat";
        case State::FooterResult: return "FinalConcatResult";
        case State::Final: return "FinalResult";
        case State::Done: return "end of trace";
    }
    return "";
}

}  // namespace

std::string_view to_string(LineKind kind) noexcept {
    for (const auto& d : kTemplates) {
        if (d.kind == kind) return d.name;
    }
    return "Unknown";
}

std::string_view to_string(IssueKind kind) noexcept {
    switch (kind) {
        case IssueKind::Malformed: return "Malformed";
        case IssueKind::Unexpected: return "Unexpected";
        case IssueKind::Missing: return "Missing";
    }
    return "Unknown";
}

std::string normalize_line(std::string_view line) {
    std::string collapsed;
    collapsed.reserve(line.size());
    bool pending_space = false;
    for (char c : line) {
        if (is_space(c)) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(' ');
        pending_space = false;
        collapsed.push_back(c);
    }

    std::string out;
    out.reserve(collapsed.size());
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        const char c = collapsed[i];
        if (c == ' ') {
            const bool before_op = i + 1 < collapsed.size() && is_operator(collapsed[i + 1]);
            const bool after_op = !out.empty() && is_operator(out.back());
            if (before_op || after_op) continue;
        }
        out.push_back(c);
    }

    for (char& c : out) {
        if (c == ' ') break;
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }

    static constexpr std::string_view kAlias = "temporary_result";
    static constexpr std::string_view kCanonical = "temp_result";
    for (std::size_t at = out.find(kAlias); at != std::string::npos;
         at = out.find(kAlias, at + kCanonical.size())) {
        out.replace(at, kAlias.size(), kCanonical);
    }
    return out;
}

std::vector<TraceLine> trace_lines(const MultiplicationTrace& trace) {
    const std::string a = trace.multiplicand.digits();
    const std::string m = std::to_string(trace.multiplier);
    const auto s = [](std::uint64_t v) { return std::to_string(v); };

    std::vector<TraceLine> lines;
    lines.push_back({LineKind::Header, {a, m, a, m}});
    for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
        const auto& b = trace.blocks[i];
        if (i > 0) lines.push_back({LineKind::Blank, {}});
        const std::string idx = s(b.index);
        const std::string d = s(b.digit);
        lines.push_back({LineKind::CarryInit, {s(b.carry_in)}});
        lines.push_back({LineKind::DigitExtract, {idx, a, d}});
        lines.push_back({LineKind::DigitMult, {idx, a, d, m, d, m, s(b.temp_mult)}});
        lines.push_back({LineKind::CarryAdd, {s(b.carry_in), s(b.temp_mult), s(b.temp_add)}});
        if (b.branch == Branch::GE10) {
            const std::string fd = s(b.fd_result.value_or(b.temp_add % 10));
            lines.push_back({LineKind::CompareGE10, {s(b.temp_add)}});
            lines.push_back({LineKind::FirstDigit, {s(b.temp_add), fd}});
            lines.push_back({LineKind::ConcatGE10, {fd, b.result_before}});
            lines.push_back({LineKind::ConcatResult, {b.result_after}});
            lines.push_back({LineKind::CarryFromSecondDigit, {s(b.carry_out), s(b.carry_out)}});
        } else {
            lines.push_back({LineKind::CompareLT10, {s(b.temp_add)}});
            lines.push_back({LineKind::CarryInit, {s(b.carry_out)}});
            lines.push_back({LineKind::ConcatLT10, {b.result_before}});
            lines.push_back({LineKind::ConcatResult, {b.result_after}});
        }
    }
    lines.push_back({LineKind::Blank, {}});
    if (trace.final_carry > 0) {
        const std::string last = trace.blocks.empty() ? std::string() : trace.blocks.back().result_after;
        lines.push_back({LineKind::FinalCarryPositive, {s(trace.final_carry)}});
        lines.push_back({LineKind::FinalCarryConcat, {s(trace.final_carry), last}});
        lines.push_back({LineKind::FinalConcatResult, {trace.final_digits}});
    } else {
        lines.push_back({LineKind::FinalCarryZero, {s(trace.final_carry)}});
    }
    lines.push_back({LineKind::FinalResult, {trace.final_digits}});
    return lines;
}

std::string render_line(const TraceLine& line) {
    const std::string_view pattern = def_of(line.kind).pattern;
    std::string out;
    out.reserve(pattern.size() + 16);
    std::size_t next = 0;
    for (std::size_t i = 0; i < pattern.size();) {
        const bool plain = pattern.compare(i, 2, "{}") == 0;
        const bool optional = pattern.compare(i, 3, "{?}") == 0;
        if (plain || optional) {
            if (next >= line.fields.size()) {
                throw std::invalid_argument("too few fields for " + std::string(to_string(line.kind)));
            }
            out += line.fields[next++];
            i += plain ? 2 : 3;
        } else {
            out.push_back(pattern[i++]);
        }
    }
    if (next != line.fields.size()) {
        throw std::invalid_argument("too many fields for " + std::string(to_string(line.kind)));
    }
    return out;
}

std::string render_lines(std::span<const TraceLine> lines) {
    std::string out;
    for (const auto& line : lines) {
        out += render_line(line);
        out.push_back('\n');
    }
    return out;
}

std::string render_trace(const MultiplicationTrace& trace) {
    const auto lines = trace_lines(trace);
    return render_lines(lines);
}

std::string render_header(const Number& multiplicand, std::uint64_t multiplier) {
    const std::string m = std::to_string(multiplier);
    return render_line({LineKind::Header, {multiplicand.digits(), m, multiplicand.digits(), m}});
}

std::string ordinal(std::uint64_t n) {
    std::string_view suffix = "th";
    if (n % 100 < 11 || n % 100 > 13) {
        switch (n % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
            default: break;
        }
    }
    return std::to_string(n) + std::string(suffix);
}

SubtaskText render_mult(Digit a, Digit b) {
    const auto x = std::to_string(a.value());
    const auto y = std::to_string(b.value());
    return {x + " by " + y + ": " + x + "*" + y + " = ", std::to_string(mult_digits(a, b))};
}

SubtaskText render_add(std::uint64_t x, Digit y) {
    if (x > 99) throw std::domain_error("t2_add left operand must be in [0, 99]");
    const auto xs = std::to_string(x);
    const auto ys = std::to_string(y.value());
    return {xs + " plus " + ys + ": " + xs + "+" + ys + "=",
            std::to_string(add_small(static_cast<unsigned>(x), y))};
}

SubtaskText render_extract(const Number& n, std::size_t pos) {
    const Digit d = extract_digit(n, pos, DigitOrder::MsbFirst);
    return {"The " + ordinal(pos) + " digit from " + n.digits() + " is ", std::to_string(d.value())};
}

SubtaskText render_concat(const Number& left, const Number& right) {
    return {"Concatenating " + left.digits() + " to " + right.digits() + " on the left gives ",
            concat_left(left, right.digits())};
}

SubtaskText render_subtask(TaskKind kind, std::span<const std::uint64_t> params) {
    if (params.size() != 2) throw std::domain_error("render_subtask expects two parameters");
    const auto digit = [](std::uint64_t v) {
        if (v > 9) throw std::domain_error("expected a single digit, got " + std::to_string(v));
        return Digit(static_cast<int>(v));
    };
    switch (kind) {
        case TaskKind::T1Mult: return render_mult(digit(params[0]), digit(params[1]));
        case TaskKind::T2Add: return render_add(params[0], digit(params[1]));
        case TaskKind::T3Extract:
            try {
                return render_extract(Number(params[0]), static_cast<std::size_t>(params[1]));
            } catch (const std::out_of_range& e) {
                throw std::domain_error(e.what());
            }
        case TaskKind::T4Concat: return render_concat(Number(params[0]), Number(params[1]));
        case TaskKind::GlobalMult: {
            const auto trace = schoolbook_trace(Number(params[0]), digit(params[1]));
            auto lines = trace_lines(trace);
            const std::string header = render_line(lines.front());
            lines.erase(lines.begin());
            return {header, render_lines(lines)};
        }
    }
    throw std::domain_error("unknown task kind");
}

ParseOutcome parse_trace(std::string_view text, ParseMode mode) {
    ParseOutcome out;
    const auto raw = split_lines(text);
    const std::size_t end_line = raw.size() + 1;

    if (mode == ParseMode::Strict) {
        State state = State::Header;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const std::string norm = normalize_line(raw[i]);
            if (norm.empty()) continue;
            const std::size_t number = i + 1;
            auto c = classify(norm);
            if (!c.kind) {
                out.issues.push_back({number, IssueKind::Malformed, std::string(raw[i])});
                return out;
            }
            LineKind kind = *c.kind;
            if (kind == LineKind::ConcatResult && state == State::FooterResult) {
                kind = LineKind::FinalConcatResult;
            }
            if (state == State::Done) {
                out.issues.push_back({number, IssueKind::Unexpected, std::string(raw[i])});
                return out;
            }
            auto next = advance(state, kind);
            if (!next) {
                out.issues.push_back({number, IssueKind::Unexpected,
                                      std::string(raw[i]) + " (expected " +
                                          std::string(expected_in(state)) + ")"});
                return out;
            }
            state = *next;
            out.lines.push_back({number, kind, std::move(c.fields)});
        }
        if (state != State::Done) {
            out.issues.push_back({end_line, IssueKind::Missing, std::string(expected_in(state))});
            return out;
        }
        std::vector<ParseIssue> assembly;
        out.trace = assemble(out.lines, assembly, end_line);
        if (!assembly.empty()) {
            out.trace.reset();
            out.issues.insert(out.issues.end(), assembly.begin(), assembly.end());
        }
        return out;
    }

    bool seen_header = false;
    bool in_footer = false;
    bool prev_fold = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::string norm = normalize_line(raw[i]);
        if (norm.empty()) continue;
        const std::size_t number = i + 1;
        auto c = classify(norm);
        if (!c.kind) {
            out.issues.push_back({number, c.near_miss ? IssueKind::Malformed : IssueKind::Unexpected,
                                  std::string(raw[i])});
            continue;
        }
        LineKind kind = *c.kind;
        if (!seen_header) {
            if (kind != LineKind::Header) {
                out.issues.push_back({number, IssueKind::Unexpected, std::string(raw[i])});
                continue;
            }
            seen_header = true;
        } else if (kind == LineKind::Header) {
            out.issues.push_back({number, IssueKind::Unexpected, std::string(raw[i])});
            continue;
        }
        if (kind == LineKind::ConcatResult && prev_fold) kind = LineKind::FinalConcatResult;
        prev_fold = kind == LineKind::FinalCarryConcat;
        if (is_footer(kind)) {
            in_footer = true;
        } else if (in_footer && kind != LineKind::Header) {
            out.issues.push_back({number, IssueKind::Unexpected, std::string(raw[i])});
        }
        out.lines.push_back({number, kind, std::move(c.fields)});
        if (kind == LineKind::FinalResult) {
            for (std::size_t j = i + 1; j < raw.size(); ++j) {
                if (!normalize_line(raw[j]).empty()) {
                    out.issues.push_back({j + 1, IssueKind::Unexpected, std::string(raw[j])});
                }
            }
            break;
        }
    }
    out.trace = assemble(out.lines, out.issues, end_line);
    std::stable_sort(out.issues.begin(), out.issues.end(),
                     [](const ParseIssue& x, const ParseIssue& y) { return x.line_number < y.line_number; });
    return out;
}

std::optional<std::string> find_final_result(std::string_view text) {
    static const CompiledTemplate& final_template = []() -> const CompiledTemplate& {
        for (const auto& t : matchers()) {
            if (t.kind == LineKind::FinalResult) return t;
        }
        throw std::logic_error("FinalResult template missing");
    }();
    for (auto line : split_lines(text)) {
        const std::string norm = normalize_line(line);
        if (auto f = match(final_template, norm)) return std::move(f->front());
    }
    return std::nullopt;
}

bool detect_terminal(std::string_view text) { return find_final_result(text).has_value(); }

}  // namespace dal
