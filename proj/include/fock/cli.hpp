#pragma once

#include <ostream>

namespace fock {

// fock_dimers {check|charpoly|prob|scan|move}. Exit codes: 0 ok, 1 check
// failure, 2 input error, 3 numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fock
