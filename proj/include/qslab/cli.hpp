#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qslab::cli {

// Routes one invocation to the owning module and renders its output.
// Exit codes: 0 success, 1 usage, 2 domain or assumption violations,
// 3 numerical failures. Data goes to `out`; diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

} // namespace qslab::cli
