#include "dal/task.hpp"

#include <array>
#include <utility>

namespace dal {

namespace {
constexpr std::array<std::pair<TaskKind, std::string_view>, 5> kTaskNames{{
    {TaskKind::T1Mult, "t1_mult"},
    {TaskKind::T2Add, "t2_add"},
    {TaskKind::T3Extract, "t3_extract"},
    {TaskKind::T4Concat, "t4_concat"},
    {TaskKind::GlobalMult, "global_mult"},
}};
}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
    for (const auto& [k, name] : kTaskNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<TaskKind> task_from_string(std::string_view name) noexcept {
    for (const auto& [k, n] : kTaskNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

}  // namespace dal
