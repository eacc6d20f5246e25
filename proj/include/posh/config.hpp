#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posh/environment.hpp"
#include "posh/graph_builder.hpp"
#include "posh/optimizer.hpp"

namespace posh {

// Which stepper moves the obstacles each time step.
enum class WorldModel { Static, NarrowPassage, Forest };

struct EnvironmentConfig {
  std::string name;
  WorldModel model{WorldModel::Static};
  Vec2 ws_min{Vec2::Zero()};
  Vec2 ws_max{Vec2::Zero()};
  double cell_size{0.1};
  double robot_radius{0.4};
  double a_max{0.5};
  double v_max{1.0};
  std::vector<Obstacle> obstacles;

  GridSpec grid() const;
  MotionParams motion(double dt) const;
  void validate() const;
};

enum class PlannerVariant { Posh, GraphThenChain, SingleChain };

std::string variant_name(PlannerVariant v);
PlannerVariant parse_variant(const std::string& name);

struct NoiseParams {
  double sigma_exec{0.1};  // execution noise on position, per axis
  double sigma_loc{0.05};  // localization noise on position, per axis
};

struct TrialConfig {
  EnvironmentConfig environment;
  PlannerVariant variant{PlannerVariant::Posh};
  BuilderParams builder;
  LmParams lm;
  NoiseParams noise;
  SupportState start;
  SupportState goal;
  std::uint64_t seed{0};
  double goal_tolerance{1.0};
  bool record_steps{true};
};

struct RunConfig {
  std::vector<std::string> environment_paths;
  std::vector<EnvironmentConfig> environments;
  TrialConfig trial;  // environment field holds environments[0]
  int runs{10};
  std::vector<int> chain_counts{2, 4, 6};
  std::string out_dir{"out"};
  bool render{false};
  bool timing_rows{true};
  bool verbose{false};
};

EnvironmentConfig load_environment_config(const std::string& path);
RunConfig load_run_config(const std::string& path);

}  // namespace posh
