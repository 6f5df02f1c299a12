// Command-line front end for the tracking-correction pipeline:
//   srcp collect | pretrain | train | eval | report
// Every subcommand takes --config/--seed/--out, writes its outputs under the
// out directory, and leaves error.json there when it fails.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "srcp/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;  // negative: keep the config's seed
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Run configuration file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory override");
  cmd->add_option("--seed", args.seed, "Master seed override")
      ->check(CLI::NonNegativeNumber);
}

srcp::RunConfig resolve_config(const CommonArgs& args) {
  srcp::RunConfig cfg;
  if (!args.config_path.empty()) cfg = srcp::load_run_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-correction pipeline for flexible-joint tracking"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults,
               "Print the default configuration and exit");

  CommonArgs collect_args, pretrain_args, train_args, eval_args;
  std::string train_init;
  std::string eval_policy = "baseline";
  std::string eval_payload = "0";
  std::string report_dir;

  CLI::App* collect = app.add_subcommand(
      "collect", "Roll the baseline controller and record the dynamics dataset");
  add_common(collect, collect_args);

  CLI::App* pretrain = app.add_subcommand(
      "pretrain", "Fit the forward model and pretrain the policy inside it");
  add_common(pretrain, pretrain_args);

  CLI::App* train =
      app.add_subcommand("train", "Train the correction policy on the plant");
  add_common(train, train_args);
  train->add_option("--init", train_init,
                    "Agent checkpoint to start from, or a resume checkpoint to "
                    "continue");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate on the held-out corpus");
  add_common(eval, eval_args);
  eval->add_option("--policy", eval_policy,
                   "'baseline' or an agent checkpoint path");
  eval->add_option("--payload", eval_payload,
                   "End-effector payload in kg, or 'auto' for the configured "
                   "evaluation payload");

  CLI::App* report = app.add_subcommand(
      "report", "Consolidate one run directory or a directory of runs");
  report->add_option("dir", report_dir, "Run directory (or parent of several)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << srcp::run_config_to_text(srcp::RunConfig{});
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 1;
  }

  std::string command = "?", error_dir = ".";
  try {
    if (collect->parsed()) {
      command = "collect";
      const srcp::RunConfig cfg = resolve_config(collect_args);
      error_dir = cfg.out_dir;
      srcp::cmd_collect(cfg);
    } else if (pretrain->parsed()) {
      command = "pretrain";
      const srcp::RunConfig cfg = resolve_config(pretrain_args);
      error_dir = cfg.out_dir;
      srcp::cmd_pretrain(cfg);
    } else if (train->parsed()) {
      command = "train";
      const srcp::RunConfig cfg = resolve_config(train_args);
      error_dir = cfg.out_dir;
      srcp::TrainOptions opts;
      opts.init_checkpoint = train_init;
      srcp::cmd_train(cfg, opts);
    } else if (eval->parsed()) {
      command = "eval";
      const srcp::RunConfig cfg = resolve_config(eval_args);
      error_dir = cfg.out_dir;
      srcp::EvalOptions opts;
      opts.policy = eval_policy;
      if (eval_payload == "auto") {
        opts.payload_kg = cfg.resolved_payload();
      } else {
        try {
          opts.payload_kg = std::stod(eval_payload);
        } catch (const std::exception&) {
          throw std::runtime_error("--payload must be a number or 'auto'");
        }
      }
      srcp::cmd_eval(cfg, opts);
    } else if (report->parsed()) {
      command = "report";
      error_dir = report_dir;
      srcp::cmd_report(report_dir);
    }
  } catch (const std::exception& e) {
    srcp::write_error_record(error_dir, command, e.what());
    std::cerr << "srcp " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
