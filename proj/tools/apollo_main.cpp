// Command-line front end: train single runs, compare optimizers, run the
// validation suite, and estimate optimizer memory footprints. All
// randomness flows from --seed, so identical invocations produce
// byte-identical CSV output.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error, 3 divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/memory_model.hpp"
#include "apollo/optimizers.hpp"
#include "apollo/rng.hpp"
#include "apollo/serialize.hpp"
#include "apollo/tasks.hpp"
#include "apollo/theory_checks.hpp"
#include "apollo/train.hpp"

namespace {

using apollo::OptimizerConfig;
using apollo::Task;
using apollo::Variant;
using nlohmann::json;

constexpr const char* kOutDirEnv = "APOLLO_OUT_DIR";

struct TaskFlags {
  std::string task;
  std::size_t dim = 64;
  double kappa = 10.0;
  std::size_t in_dim = 32;
  std::size_t out_dim = 16;
  std::size_t input_dim = 16;
  std::size_t hidden = 32;
  std::size_t classes = 5;
  std::size_t samples = 256;
  std::uint64_t task_seed = 0;
  bool task_seed_set = false;
};

struct OptimizerFlags {
  std::string opt = "apollo";
  double lr = 1e-2;
  std::optional<double> scale;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double gamma = 1.01;
  bool no_limiter = false;
  std::size_t rank = 16;
  bool rank_set = false;
  long period = 200;
  bool no_bias_correction = false;
  std::string projector = "random";
};

void add_task_flags(CLI::App* cmd, TaskFlags& f) {
  cmd->add_option("--task", f.task, "Task: quad, linreg or mlp")->required();
  cmd->add_option("--dim", f.dim, "quad: parameter dimension");
  cmd->add_option("--kappa", f.kappa, "quad: condition number");
  cmd->add_option("--in-dim", f.in_dim, "linreg: input dimension");
  cmd->add_option("--out-dim", f.out_dim, "linreg: output dimension");
  cmd->add_option("--input-dim", f.input_dim, "mlp: input dimension");
  cmd->add_option("--hidden", f.hidden, "mlp: hidden width");
  cmd->add_option("--classes", f.classes, "mlp: class count");
  cmd->add_option("--samples", f.samples, "linreg/mlp: sample count");
  cmd->add_option("--task-seed", f.task_seed, "Task data seed (defaults to --seed)")
      ->each([&f](const std::string&) { f.task_seed_set = true; });
}

void add_optimizer_flags(CLI::App* cmd, OptimizerFlags& f) {
  cmd->add_option("--opt", f.opt,
                  "Optimizer: adamw, sgd, apollo, apollo-mini, galore-rp");
  cmd->add_option("--lr", f.lr, "Learning rate");
  cmd->add_option("--scale", f.scale, "Update scale alpha");
  cmd->add_option("--beta1", f.beta1, "First-moment decay");
  cmd->add_option("--beta2", f.beta2, "Second-moment decay");
  cmd->add_option("--eps", f.epsilon, "Denominator epsilon");
  cmd->add_option("--weight-decay", f.weight_decay, "Decoupled weight decay");
  cmd->add_option("--gamma", f.gamma, "Norm-growth limit");
  cmd->add_flag("--no-limiter", f.no_limiter, "Disable the norm-growth limiter");
  cmd->add_option("--rank", f.rank, "Projection rank")
      ->each([&f](const std::string&) { f.rank_set = true; });
  cmd->add_option("--period", f.period, "Projector refresh period");
  cmd->add_flag("--no-bias-correction", f.no_bias_correction,
                "Use raw moments instead of bias-corrected ones");
  cmd->add_option("--projector", f.projector, "Projector: random, svd or identity");
}

Task build_task(const TaskFlags& f, std::uint64_t default_seed) {
  const std::uint64_t seed = f.task_seed_set ? f.task_seed : default_seed;
  if (f.task == "quad") return apollo::make_quadratic(f.dim, f.kappa, seed);
  if (f.task == "linreg")
    return apollo::make_linear_regression(f.in_dim, f.out_dim, f.samples, seed);
  if (f.task == "mlp")
    return apollo::make_mlp(f.input_dim, f.hidden, f.classes, f.samples, seed);
  throw apollo::ConfigError("unknown task: " + f.task);
}

OptimizerConfig build_optimizer(const OptimizerFlags& f) {
  OptimizerConfig cfg;
  cfg.variant = apollo::variant_from_name(f.opt);
  switch (cfg.variant) {
    case Variant::AdamW: cfg = OptimizerConfig::adamw(f.lr); break;
    case Variant::Sgd: cfg = OptimizerConfig::sgd(f.lr); break;
    case Variant::Apollo: cfg = OptimizerConfig::apollo(f.lr, f.rank); break;
    case Variant::ApolloMini: cfg = OptimizerConfig::apollo_mini(f.lr); break;
    case Variant::GaloreRp: cfg = OptimizerConfig::galore_rp(f.lr, f.rank); break;
  }
  if (cfg.variant == Variant::ApolloMini && f.rank_set && f.rank != 1)
    std::cerr << "warning: apollo-mini uses rank 1; ignoring --rank "
              << f.rank << "\n";
  if (f.scale) cfg.scale = *f.scale;
  cfg.beta1 = f.beta1;
  cfg.beta2 = f.beta2;
  cfg.epsilon = f.epsilon;
  cfg.weight_decay = f.weight_decay;
  cfg.period = f.period;
  cfg.bias_correction = !f.no_bias_correction;
  if (cfg.variant == Variant::Apollo || cfg.variant == Variant::ApolloMini)
    cfg.growth_limit = f.no_limiter ? std::nullopt : std::optional<double>(f.gamma);
  if (f.projector == "random") cfg.projector = apollo::ProjectorKind::RandomGaussian;
  else if (f.projector == "svd") cfg.projector = apollo::ProjectorKind::TopSingular;
  else if (f.projector == "identity") cfg.projector = apollo::ProjectorKind::Identity;
  else throw apollo::ConfigError("unknown projector: " + f.projector);
  cfg.validate();
  return cfg;
}

// Relative output paths land under $APOLLO_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  if (path.empty()) return path;
  const char* base = std::getenv(kOutDirEnv);
  if (!base || *base == '\0') return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw apollo::ConfigError("cannot open output file: " + tmp.string());
    out << text;
  }
  fs::rename(tmp, target);
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

int cmd_train(const TaskFlags& tf, const OptimizerFlags& of, long steps,
              std::uint64_t seed, const std::string& schedule,
              const std::string& out) {
  const Task task = build_task(tf, seed);
  const OptimizerConfig cfg = build_optimizer(of);
  apollo::TrainOptions options;
  options.steps = steps;
  options.seed = seed;
  options.schedule = schedule == "warmup-cosine" ? apollo::LrSchedule::WarmupCosine
                                                 : apollo::LrSchedule::Constant;

  const apollo::TrainTrace trace = apollo::train(task, cfg, options);
  if (!out.empty()) {
    const std::string path = resolve_out(out);
    apollo::write_trace_csv(trace, path);
    json snapshot = apollo::trace_config_snapshot(trace);
    snapshot["schedule"] = schedule;
    write_text_atomic(sidecar_path(path), snapshot.dump(2) + "\n");
  }
  std::printf("final_loss=%.17g\n", trace.final_loss());
  return 0;
}

int cmd_compare(const TaskFlags& tf, const OptimizerFlags& of,
                const std::vector<std::string>& opts,
                const std::vector<double>& lrs, long steps, std::uint64_t seed,
                const std::string& out, const std::string& format) {
  std::vector<Task> tasks = {build_task(tf, seed)};
  std::vector<OptimizerConfig> configs;
  const std::vector<double> sweep = lrs.empty() ? std::vector<double>{of.lr} : lrs;
  for (const std::string& name : opts.empty() ? std::vector<std::string>{of.opt} : opts) {
    for (double lr : sweep) {
      OptimizerFlags one = of;
      one.opt = name;
      one.lr = lr;
      configs.push_back(build_optimizer(one));
    }
  }
  apollo::TrainOptions options;
  options.steps = steps;
  options.seed = seed;
  const apollo::CompareTable table = apollo::compare(tasks, configs, options);

  const std::string text =
      format == "json" ? json(table).dump(2) + "\n" : apollo::compare_to_csv(table);
  if (!out.empty())
    write_text_atomic(resolve_out(out), text);
  else
    std::cout << text;
  return 0;
}

int cmd_verify(long trials, std::uint64_t seed, const std::string& only,
               const std::string& out) {
  json checks = json::array();
  bool all_pass = true;
  const bool run_all = only.empty();
  auto wants = [&](const std::string& name) { return run_all || only == name; };
  auto record = [&](const auto& report) {
    all_pass = all_pass && report.pass;
    checks.push_back(report);
    std::printf("[%s] %s\n", report.pass ? "PASS" : "FAIL",
                std::string(checks.back().at("check").template get<std::string>()).c_str());
  };

  if (wants("norm-preservation"))
    record(apollo::check_norm_preservation(128, 64, 0.5, trials, seed));

  const std::size_t grids[][3] = {{32, 64, 8}, {64, 64, 16}, {128, 32, 4}};
  if (wants("first-moment")) {
    apollo::IdentityCheckReport worst;
    worst.check = "first-moment";
    worst.tolerance = 1e-10;
    worst.pass = true;
    for (const auto& g : grids) {
      for (int s = 0; s < 5; ++s) {
        auto r = apollo::check_first_moment_identity(
            g[0], g[1], g[2], 20, apollo::mix_seed(seed, 100 + s));
        worst.max_rel_error = std::max(worst.max_rel_error, r.max_rel_error);
        worst.pass = worst.pass && r.pass;
      }
    }
    record(worst);
  }
  if (wants("second-moment")) {
    apollo::IdentityCheckReport worst;
    worst.check = "second-moment-recursion";
    worst.tolerance = 1e-10;
    worst.pass = true;
    for (const auto& g : grids) {
      for (int s = 0; s < 5; ++s) {
        auto r = apollo::check_second_moment_recursion(
            g[0], g[1], g[2], 20, apollo::mix_seed(seed, 200 + s));
        worst.max_rel_error = std::max(worst.max_rel_error, r.max_rel_error);
        worst.pass = worst.pass && r.pass;
      }
    }
    record(worst);
    const std::size_t rank = apollo::rank_for_second_moment_bound(0.5, 10, 0.1);
    record(apollo::check_second_moment_bound(64, 8, rank, 10, 0.5,
                                             std::max<long>(trials / 5, 200), seed));
  }
  if (wants("ratio-bound"))
    record(apollo::check_ratio_bound(64, 256, 16, 15, 50, seed));
  if (wants("oracle"))
    record(apollo::check_identity_oracle(10, 20, seed));
  if (wants("gradients")) {
    for (const Task& task : {apollo::make_quadratic(16, 50.0, seed),
                             apollo::make_linear_regression(12, 7, 64, seed),
                             apollo::make_mlp(10, 14, 4, 96, seed)})
      record(apollo::gradient_check(task, 10, apollo::mix_seed(seed, 7)));
  }

  const json report = {{"pass", all_pass}, {"checks", checks}};
  if (!out.empty()) write_text_atomic(resolve_out(out), report.dump(2) + "\n");
  std::printf("verify: %s\n", all_pass ? "all checks passed" : "FAILURES present");
  return all_pass ? 0 : 1;
}

int cmd_memory(const std::string& arch_tag, const std::string& arch_file,
               const std::string& opt, std::size_t rank, std::size_t vocab,
               std::size_t bytes_per_elem, std::size_t state_bytes,
               const std::string& out) {
  apollo::ArchSpec arch;
  if (!arch_file.empty()) {
    std::ifstream in(arch_file);
    if (!in) throw apollo::ConfigError("cannot read arch file: " + arch_file);
    arch = apollo::arch_from_json(json::parse(in));
  } else {
    arch = apollo::llama_arch(arch_tag, vocab);
  }
  arch.bytes_per_elem = bytes_per_elem;
  const Variant variant = apollo::variant_from_name(opt);
  const apollo::MemoryReport report =
      state_bytes > 0 ? apollo::estimate(arch, variant, rank, state_bytes)
                      : apollo::estimate(arch, variant, rank);
  json j = report;
  j["param_count"] = arch.param_count();
  const std::string text = j.dump(2) + "\n";
  if (!out.empty())
    write_text_atomic(resolve_out(out), text);
  else
    std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured learning-rate optimizers with a low-rank auxiliary "
               "space: training harness, validation suite and memory estimator"};
  app.require_subcommand(1);

  TaskFlags task_flags;
  OptimizerFlags opt_flags;
  long steps = 100;
  std::uint64_t seed = 0;
  std::string schedule = "constant";
  std::string out;

  CLI::App* train = app.add_subcommand("train", "Run one optimizer on one task");
  train->set_config("--config");
  add_task_flags(train, task_flags);
  add_optimizer_flags(train, opt_flags);
  train->add_option("--steps", steps, "Training steps");
  train->add_option("--seed", seed, "Run seed");
  train->add_option("--schedule", schedule, "constant or warmup-cosine");
  train->add_option("--out", out, "CSV trace path (a .json config snapshot is "
                                  "written next to it)");

  TaskFlags cmp_task;
  OptimizerFlags cmp_opt;
  std::vector<std::string> cmp_opts;
  std::vector<double> cmp_lrs;
  long cmp_steps = 100;
  std::uint64_t cmp_seed = 0;
  std::string cmp_out;
  std::string cmp_format = "csv";

  CLI::App* cmp = app.add_subcommand("compare", "Cross product of optimizers and "
                                                "learning rates on a task");
  cmp->set_config("--config");
  add_task_flags(cmp, cmp_task);
  add_optimizer_flags(cmp, cmp_opt);
  cmp->add_option("--opts", cmp_opts, "Optimizer list")->delimiter(',');
  cmp->add_option("--lrs", cmp_lrs, "Learning-rate sweep")->delimiter(',');
  cmp->add_option("--steps", cmp_steps, "Training steps");
  cmp->add_option("--seed", cmp_seed, "Run seed");
  cmp->add_option("--out", cmp_out, "Output path (stdout when omitted)");
  cmp->add_option("--format", cmp_format, "csv or json");

  long trials = 10000;
  std::uint64_t verify_seed = 0;
  std::string only;
  std::string verify_out;

  CLI::App* verify = app.add_subcommand("verify", "Run the validation checks");
  verify->add_option("--trials", trials, "Monte-Carlo trials");
  verify->add_option("--seed", verify_seed, "Seed");
  verify->add_option("--only", only,
                     "Single check: norm-preservation, first-moment, "
                     "second-moment, ratio-bound, oracle or gradients");
  verify->add_option("--out", verify_out, "JSON report path");

  std::string arch_tag = "llama60m";
  std::string arch_file;
  std::string mem_opt = "apollo";
  std::size_t mem_rank = 128;
  std::size_t vocab = 32000;
  std::size_t bytes_per_elem = 2;
  std::size_t state_bytes = 0;
  std::string mem_out;

  CLI::App* memory = app.add_subcommand("memory", "Weight and optimizer-state "
                                                  "footprint estimate");
  memory->add_option("--arch", arch_tag, "llama60m, llama130m, llama350m, "
                                         "llama1b or llama7b");
  memory->add_option("--arch-file", arch_file, "JSON architecture description");
  memory->add_option("--opt", mem_opt, "Optimizer variant");
  memory->add_option("--rank", mem_rank, "Projection rank");
  memory->add_option("--vocab", vocab, "Vocabulary size");
  memory->add_option("--bytes-per-elem", bytes_per_elem, "Weight element bytes");
  memory->add_option("--state-bytes-per-elem", state_bytes,
                     "Override optimizer-state element bytes (0 = per-variant "
                     "default)");
  memory->add_option("--out", mem_out, "JSON report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(task_flags, opt_flags, steps, seed, schedule, out);
    if (*cmp)
      return cmd_compare(cmp_task, cmp_opt, cmp_opts, cmp_lrs, cmp_steps, cmp_seed,
                         cmp_out, cmp_format);
    if (*verify) return cmd_verify(trials, verify_seed, only, verify_out);
    if (*memory)
      return cmd_memory(arch_tag, arch_file, mem_opt, mem_rank, vocab,
                        bytes_per_elem, state_bytes, mem_out);
  } catch (const apollo::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << " (step " << e.step() << ")\n";
    return 3;
  } catch (const apollo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const apollo::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
