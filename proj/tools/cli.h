#ifndef EWGSL_TOOLS_CLI_H_
#define EWGSL_TOOLS_CLI_H_

#include <ostream>

namespace ewgsl {

// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ewgsl

#endif  // EWGSL_TOOLS_CLI_H_
