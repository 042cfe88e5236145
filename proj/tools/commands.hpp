#pragma once

namespace g3::cli {

// Parses argv, dispatches to a subcommand, writes run manifests.
// Exit codes: 0 success, 1 usage or validation error, 2 numerical abort.
int run(int argc, const char* const* argv);

}  // namespace g3::cli
