#ifndef CLUSTERVAR_CLI_HPP
#define CLUSTERVAR_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "clustervar/omega.hpp"

namespace clustervar {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Runs the tool with argv-style arguments (args[0] is the program name).
/// Reports go to `out` unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "iid:s2", "equi:s2,rho" or "ar1:s2,rho" into a covariance for the partition.
OmegaSpec parse_omega(const std::string& text, const ClusterPartition& partition);

}  // namespace clustervar

#endif  // CLUSTERVAR_CLI_HPP
