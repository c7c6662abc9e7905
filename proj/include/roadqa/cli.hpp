#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roadqa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBackendOrIo = 2;

/// Entry point shared by the `roadqa` binary and the tests. args[0] is the
/// program name. Subcommands: synth, filter, ingest, index, score, eval,
/// overlap, human-eval, serve.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roadqa::cli
