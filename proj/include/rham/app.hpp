#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rham/pathopt.hpp"

namespace rham::app {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct AppConfig {
  ScenarioConfig scenario;
  std::vector<TheoremId> theorems;
  std::vector<PathQuery> path_queries;
  std::string output_dir = "runs";
  std::string canonical_bytes;  // sorted keys, compact, UTF-8
  std::string digest;           // hex of the canonical bytes
};

AppConfig load_config(const std::string& path);
AppConfig parse_config_text(const std::string& text);

std::string format17(double x);

// Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 any
// theorem verdict is fail.
int cmd_run(const std::string& config_path,
            const std::string& out_override = "");
int cmd_verify(const std::string& run_dir,
               const std::vector<std::string>& theorem_names,
               std::optional<double> tolerance_override = std::nullopt);
int cmd_sweep(const std::string& config_path,
              const std::vector<std::size_t>& resolutions,
              const std::string& out_override = "");

// Trajectory as run by a config (forward, or forward metric + conjugate).
FlowTrajectory run_scenario(const AppConfig& cfg);

}  // namespace rham::app
