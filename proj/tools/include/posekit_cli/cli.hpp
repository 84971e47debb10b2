#pragma once

#include <iosfwd>

namespace posekit::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,     ///< bad arguments, unreadable files, validation errors
  kDivergence = 2,  ///< the optimizer hit a non-finite objective
};

/// Runs the command line `argv[0] <subcommand> ...`, writing results to `out`
/// and diagnostics to `err`. Never throws.
///
/// Subcommands:
///   transfer  pose transfer for one source/target pair or a manifest of pairs
///   eval      metric report between two meshes
///   weights   export pseudo skinning weights, optionally scored against ground truth
///   ik-check  IK/FK round-trip and scale-invariance diagnostic
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace posekit::cli
