#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace dal {

/// Entry point of the `dal` tool. args excludes the program name.
/// Returns 0 on success, 1 on failure (including an Invalid verification),
/// 2 on a usage error.
int cli_main(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace dal
