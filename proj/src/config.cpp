#include "posh/config.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace posh {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return j;
}

Vec2 parse_vec2(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) {
    throw std::runtime_error(what + " must be a [x, y] array");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

SupportState parse_state(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error(what + " must be a [px, py, vx, vy] array");
  }
  return SupportState(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                      j[3].get<double>());
}

Obstacle::Motion parse_motion(const std::string& name) {
  if (name == "static") return Obstacle::Motion::Static;
  if (name == "patrol_x") return Obstacle::Motion::PatrolX;
  if (name == "random_accel") return Obstacle::Motion::RandomAccel;
  throw std::runtime_error("unknown obstacle motion: " + name);
}

WorldModel parse_world_model(const std::string& name) {
  if (name == "static") return WorldModel::Static;
  if (name == "narrow_passage") return WorldModel::NarrowPassage;
  if (name == "forest") return WorldModel::Forest;
  throw std::runtime_error("unknown world model: " + name);
}

}  // namespace

GridSpec EnvironmentConfig::grid() const {
  GridSpec spec;
  spec.origin = ws_min;
  spec.cell_size = cell_size;
  spec.dims.x() = static_cast<int>(std::lround((ws_max.x() - ws_min.x()) / cell_size));
  spec.dims.y() = static_cast<int>(std::lround((ws_max.y() - ws_min.y()) / cell_size));
  return spec;
}

MotionParams EnvironmentConfig::motion(double dt) const {
  MotionParams mp;
  mp.dt = dt;
  mp.a_max = a_max;
  mp.v_max = v_max;
  mp.ws_min = ws_min;
  mp.ws_max = ws_max;
  return mp;
}

void EnvironmentConfig::validate() const {
  if (!(ws_max.x() > ws_min.x()) || !(ws_max.y() > ws_min.y())) {
    throw std::runtime_error("environment: workspace max must exceed min");
  }
  if (!(cell_size > 0.0)) throw std::runtime_error("environment: cell_size must be > 0");
  if (robot_radius < 0.0) throw std::runtime_error("environment: robot_radius must be >= 0");
  if (!(a_max >= 0.0) || !(v_max >= 0.0)) {
    throw std::runtime_error("environment: a_max/v_max must be >= 0");
  }
  std::set<int> ids;
  for (const Obstacle& ob : obstacles) {
    if (!(ob.half_extents.x() > 0.0) || !(ob.half_extents.y() > 0.0)) {
      throw std::runtime_error("environment: obstacle half_extents must be > 0");
    }
    if (!ids.insert(ob.id).second) {
      throw std::runtime_error("environment: obstacle ids must be unique");
    }
    if (ob.motion == Obstacle::Motion::PatrolX && !(ob.patrol_hi >= ob.patrol_lo)) {
      throw std::runtime_error("environment: patrol bounds must satisfy lo <= hi");
    }
  }
  grid().validate();
}

std::string variant_name(PlannerVariant v) {
  switch (v) {
    case PlannerVariant::Posh: return "POSH";
    case PlannerVariant::GraphThenChain: return "GRAPH_THEN_CHAIN";
    case PlannerVariant::SingleChain: return "SINGLE_CHAIN";
  }
  return "?";
}

PlannerVariant parse_variant(const std::string& name) {
  if (name == "POSH") return PlannerVariant::Posh;
  if (name == "GRAPH_THEN_CHAIN") return PlannerVariant::GraphThenChain;
  if (name == "SINGLE_CHAIN") return PlannerVariant::SingleChain;
  throw std::runtime_error("unknown planner variant: " + name);
}

EnvironmentConfig load_environment_config(const std::string& path) {
  const json j = load_json(path);
  EnvironmentConfig env;
  env.name = j.value("name", std::filesystem::path(path).stem().string());
  env.model = parse_world_model(j.value("model", "static"));
  if (!j.contains("workspace")) throw std::runtime_error(path + ": missing workspace");
  env.ws_min = parse_vec2(j.at("workspace").at("min"), "workspace.min");
  env.ws_max = parse_vec2(j.at("workspace").at("max"), "workspace.max");
  env.cell_size = j.value("cell_size", 0.1);
  env.robot_radius = j.value("robot_radius", 0.4);
  if (j.contains("motion")) {
    env.a_max = j.at("motion").value("a_max", 0.5);
    env.v_max = j.at("motion").value("v_max", 1.0);
  }
  for (const json& oj : j.value("obstacles", json::array())) {
    Obstacle ob;
    ob.id = oj.at("id").get<int>();
    ob.center = parse_vec2(oj.at("center"), "obstacle center");
    ob.half_extents = parse_vec2(oj.at("half_extents"), "obstacle half_extents");
    if (oj.contains("velocity")) ob.velocity = parse_vec2(oj.at("velocity"), "obstacle velocity");
    ob.motion = parse_motion(oj.value("motion", "static"));
    if (oj.contains("patrol")) {
      const json& pj = oj.at("patrol");
      if (!pj.is_array() || pj.size() != 2) {
        throw std::runtime_error("obstacle patrol must be [lo, hi]");
      }
      ob.patrol_lo = pj[0].get<double>();
      ob.patrol_hi = pj[1].get<double>();
    }
    env.obstacles.push_back(ob);
  }
  env.validate();
  return env;
}

RunConfig load_run_config(const std::string& path) {
  const json j = load_json(path);
  RunConfig run;

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  if (j.contains("environments")) {
    for (const json& e : j.at("environments")) {
      run.environment_paths.push_back(resolve(e.get<std::string>()));
    }
  } else if (j.contains("environment")) {
    run.environment_paths.push_back(resolve(j.at("environment").get<std::string>()));
  } else {
    throw std::runtime_error(path + ": needs an environment or environments entry");
  }
  for (const std::string& p : run.environment_paths) {
    run.environments.push_back(load_environment_config(p));
  }

  TrialConfig& trial = run.trial;
  trial.environment = run.environments.front();

  if (!j.contains("trial")) throw std::runtime_error(path + ": missing trial section");
  const json& tj = j.at("trial");
  trial.start = parse_state(tj.at("start"), "trial.start");
  trial.goal = parse_state(tj.at("goal"), "trial.goal");
  trial.variant = parse_variant(tj.value("variant", "POSH"));
  trial.seed = tj.value("seed", std::uint64_t{0});
  trial.goal_tolerance = tj.value("goal_tolerance", 1.0);

  if (j.contains("builder")) {
    const json& bj = j.at("builder");
    BuilderParams& b = trial.builder;
    b.n_chains = bj.value("n_chains", b.n_chains);
    b.n_steps = bj.value("n_steps", b.n_steps);
    b.dt = bj.value("dt", b.dt);
    b.qc = bj.value("qc", b.qc);
    b.interconnection_ratio = bj.value("interconnection_ratio", b.interconnection_ratio);
    b.interconnection_qc = bj.value("interconnection_qc", b.interconnection_qc);
    if (bj.contains("b_max")) b.b_max = bj.at("b_max").get<double>();
    b.n_interp = bj.value("n_interp", b.n_interp);
    b.eps = bj.value("eps", b.eps);
    b.sigma_obs = bj.value("sigma_obs", b.sigma_obs);
    b.anchor_precision = bj.value("anchor_precision", b.anchor_precision);
  }
  trial.builder.r_robot = trial.environment.robot_radius;
  trial.builder.validate();

  if (j.contains("lm")) {
    const json& lj = j.at("lm");
    LmParams& lm = trial.lm;
    lm.lambda_init = lj.value("lambda_init", lm.lambda_init);
    lm.lambda_factor = lj.value("lambda_factor", lm.lambda_factor);
    lm.max_iters = lj.value("max_iters", lm.max_iters);
    lm.rel_tol = lj.value("rel_tol", lm.rel_tol);
    lm.abs_tol = lj.value("abs_tol", lm.abs_tol);
    lm.lambda_max = lj.value("lambda_max", lm.lambda_max);
  }
  trial.lm.validate();

  if (j.contains("noise")) {
    const json& nj = j.at("noise");
    trial.noise.sigma_exec = nj.value("sigma_exec", trial.noise.sigma_exec);
    trial.noise.sigma_loc = nj.value("sigma_loc", trial.noise.sigma_loc);
  }
  if (trial.noise.sigma_exec < 0.0 || trial.noise.sigma_loc < 0.0) {
    throw std::runtime_error(path + ": noise sigmas must be >= 0");
  }

  run.runs = j.value("runs", run.runs);
  if (run.runs < 1) throw std::runtime_error(path + ": runs must be >= 1");
  if (j.contains("chain_counts")) {
    run.chain_counts.clear();
    for (const json& c : j.at("chain_counts")) run.chain_counts.push_back(c.get<int>());
  }
  run.out_dir = j.value("out", run.out_dir);
  run.render = j.value("render", run.render);
  run.timing_rows = j.value("timing_rows", run.timing_rows);
  return run;
}

}  // namespace posh
