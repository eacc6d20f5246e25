#pragma once

#include <cstdint>
#include <string>

namespace posh {

// Command-line overrides layered on top of the JSON run config. Empty string
// or unset flag means "keep the config's value".
struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed{0};
  bool has_seed{false};
  int runs{0};  // <= 0 keeps the config
  std::string variant;
  int jobs{1};
  bool render{false};
  bool has_render{false};
  bool verbose{false};
};

// Each command returns a process exit code: 0 when the program ran to
// completion (even if the planning task itself failed), nonzero on a crash,
// malformed config, or unwritable output.
int cmd_plan(const CliOverrides& opts);
int cmd_bench(const CliOverrides& opts);
int cmd_sweep_chains(const CliOverrides& opts);
int cmd_render(const CliOverrides& opts);

}  // namespace posh
