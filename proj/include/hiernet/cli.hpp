#pragma once

#include <string>
#include <vector>

namespace hiernet {

/// Entry point behind the hiernet binary. Subcommands: generate, fit, cv,
/// project, bench. Returns 0 on success, 1 on usage errors, 2 on numerical
/// failures.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

}  // namespace hiernet
