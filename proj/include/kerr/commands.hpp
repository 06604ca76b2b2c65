#pragma once

#include "kerr/io.hpp"

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

namespace kerr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDomain = 65;

struct CommandResult {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;
  std::vector<std::string> files;
  std::vector<std::string> notes;
};

/// Levels, pair gaps and the critical line over the xi grid.
CommandResult cmd_spectrum(const io::RunConfig& config);
/// DOS (quantum and semiclassical), participation ratio, occupation and
/// Husimi grids of selected eigenstates at a single xi.
CommandResult cmd_eigenstates(const io::RunConfig& config);
/// Survival probability, FOTOC and Husimi entropy of each initial state,
/// optional Husimi snapshots, and a fit summary.
CommandResult cmd_evolve(const io::RunConfig& config);
/// Contours, separatrix, fixed points and RK4 trajectories.
CommandResult cmd_classical(const io::RunConfig& config);
/// {K, epsilon2, xi} of the effective model.
nlohmann::json cmd_map_params(const MicroscopicParams& micro);

/// 64 usage, 65 declared domain errors, 2 numerical/convergence failures.
int exit_code_for(const std::exception& e);

}  // namespace kerr::cli
