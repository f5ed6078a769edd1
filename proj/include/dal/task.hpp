#pragma once

#include <optional>
#include <string_view>

namespace dal {

enum class TaskKind { T1Mult, T2Add, T3Extract, T4Concat, GlobalMult };

/// Wire names: "t1_mult", "t2_add", "t3_extract", "t4_concat", "global_mult".
std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> task_from_string(std::string_view name) noexcept;

}  // namespace dal
