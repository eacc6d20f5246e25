#include <CLI11.hpp>

#include "posh/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online trajectory planner over a multi-chain motion graph"};
  app.require_subcommand(1);

  posh::CliOverrides opts;
  int jobs = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "run config JSON")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
        ->each([&](const std::string&) { opts.has_seed = true; });
    cmd->add_flag("--verbose", opts.verbose, "chatty progress output");
    return cmd;
  };

  CLI::App* plan = add_common(app.add_subcommand("plan", "run one trial, write logs"));
  plan->add_option("--variant", opts.variant, "POSH | GRAPH_THEN_CHAIN | SINGLE_CHAIN");
  plan->add_flag("--render", [&](std::int64_t v) { opts.render = v > 0; opts.has_render = true; },
                 "also write per-step SVG frames");

  CLI::App* bench =
      add_common(app.add_subcommand("bench", "compare the planner variants over seeded runs"));
  bench->add_option("--runs", opts.runs, "Monte Carlo runs per variant/environment");
  bench->add_option("--variant", opts.variant, "restrict to a single variant");
  bench->add_option("--jobs", jobs, "worker threads");

  CLI::App* sweep = add_common(
      app.add_subcommand("sweep-chains", "benchmark across the configured chain counts"));
  sweep->add_option("--runs", opts.runs, "Monte Carlo runs per count/environment");
  sweep->add_option("--jobs", jobs, "worker threads");

  CLI::App* render =
      add_common(app.add_subcommand("render", "run one trial, write SVG frames only"));
  render->add_option("--variant", opts.variant, "POSH | GRAPH_THEN_CHAIN | SINGLE_CHAIN");

  CLI11_PARSE(app, argc, argv);
  opts.jobs = jobs;

  if (app.got_subcommand(plan)) return posh::cmd_plan(opts);
  if (app.got_subcommand(bench)) return posh::cmd_bench(opts);
  if (app.got_subcommand(sweep)) return posh::cmd_sweep_chains(opts);
  if (app.got_subcommand(render)) return posh::cmd_render(opts);
  return 1;
}
