// cli.hpp — command-line front end (subcommands: simulate, estimate,
// compare, gen-system, validate). Exit codes: 0 success, 1 validation or
// usage error, 2 runtime error.

#pragma once

namespace qse {

int run_cli(int argc, const char* const* argv);

}  // namespace qse
