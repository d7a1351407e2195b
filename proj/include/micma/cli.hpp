#ifndef MICMA_CLI_HPP
#define MICMA_CLI_HPP

#include <iosfwd>

namespace micma {

/// Entry point of the mi-cmaes tool: `optimize`, `experiment` and
/// `alpha-grid` subcommands. Returns 0 on clean termination, 1 on numerical
/// or internal failure, 2 on usage or configuration errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace micma

#endif
