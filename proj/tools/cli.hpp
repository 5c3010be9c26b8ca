#ifndef DSHIFT_TOOLS_CLI_HPP_
#define DSHIFT_TOOLS_CLI_HPP_

#include <iosfwd>

namespace dshift::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;
inline constexpr int kUsageError = 2;

/// Runs one command line. Machine-readable results go to `out`,
/// diagnostics to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace dshift::cli

#endif /* DSHIFT_TOOLS_CLI_HPP_ */
