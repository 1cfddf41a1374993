#include "apollo/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "apollo/errors.hpp"
#include "apollo/rng.hpp"

namespace apollo {

namespace {

constexpr double kDivergenceThreshold = 1e12;

bool is_matrix_param(const Matrix& w) { return w.rows() > 1 && w.cols() > 1; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double TrainTrace::final_loss() const {
  return records.empty() ? 0.0 : records.back().loss;
}

double lr_multiplier(LrSchedule schedule, long step, long total_steps) {
  if (schedule == LrSchedule::Constant) return 1.0;
  const long warmup = std::max<long>(1, total_steps / 10);
  if (step < warmup)
    return static_cast<double>(step + 1) / static_cast<double>(warmup);
  const double progress = static_cast<double>(step - warmup) /
                          static_cast<double>(std::max<long>(1, total_steps - warmup));
  const double floor = 0.1;
  return floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

ParamwiseOptimizer::ParamwiseOptimizer(OptimizerConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
}

StepInfo ParamwiseOptimizer::step(std::size_t param_index, Matrix& w,
                                  const Matrix& g, double lr_mult) {
  if (states_.size() <= param_index) states_.resize(param_index + 1);
  OptimizerConfig cfg = cfg_;
  cfg.lr *= lr_mult;

  const bool low_rank = cfg.variant == Variant::Apollo ||
                        cfg.variant == Variant::ApolloMini ||
                        cfg.variant == Variant::GaloreRp;

  if (cfg.variant == Variant::Sgd) return sgd_step(w, g, cfg);

  if (!low_rank || !is_matrix_param(w)) {
    // AdamW, or the vector/scalar fallback for low-rank variants.
    OptimizerConfig full = cfg;
    full.variant = Variant::AdamW;
    full.growth_limit = std::nullopt;
    if (!states_[param_index])
      states_[param_index] = make_adamw_state(w.rows(), w.cols());
    return adamw_step(w, g, std::get<AdamWState>(*states_[param_index]), full);
  }

  if (!states_[param_index]) {
    // Clamp the rank for small matrices so one config can drive tensors of
    // mixed shapes.
    OptimizerConfig sized = cfg;
    sized.rank = std::min<std::size_t>(cfg.rank, std::min(w.rows(), w.cols()));
    if (cfg.projector == ProjectorKind::Identity)
      sized.rank = std::min(w.rows(), w.cols());
    states_[param_index] = make_apollo_state(sized, seed_, param_index, w.rows(), w.cols());
  }
  ApolloState& st = std::get<ApolloState>(*states_[param_index]);
  OptimizerConfig sized = cfg;
  sized.rank = st.projector.rank;
  if (cfg.variant == Variant::GaloreRp) return galore_rp_step(w, g, st, sized);
  return apollo_step(w, g, st, sized);
}

TrainTrace train(const Task& task, const OptimizerConfig& cfg,
                 const TrainOptions& options) {
  if (options.steps < 1) throw ConfigError("train requires steps >= 1");
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  TrainTrace trace;
  trace.task_name = task.name;
  trace.config = cfg;
  trace.steps = options.steps;
  trace.seed = options.seed;
  trace.records.reserve(options.steps);

  std::vector<Matrix> params = task.initial_params;
  ParamwiseOptimizer optimizer(cfg, options.seed);

  for (long step = 0; step < options.steps; ++step) {
    std::vector<Matrix> grads;
    const double loss = task.eval(params, &grads);
    if (!std::isfinite(loss) || loss > kDivergenceThreshold)
      throw DivergenceError("loss diverged at step " + std::to_string(step), step);

    const double lr_mult = lr_multiplier(options.schedule, step, options.steps);
    TraceRecord rec;
    rec.step = step;
    rec.loss = loss;
    double grad_sq = 0.0;
    double update_sq = 0.0;
    double scale_sum = 0.0;
    std::size_t scaled_params = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double gn = fro_norm(grads[i]);
      grad_sq += gn * gn;
      const StepInfo info = optimizer.step(i, params[i], grads[i], lr_mult);
      update_sq += info.update_norm * info.update_norm;
      rec.limited = rec.limited || info.limited;
      if (!info.scales.empty()) {
        scale_sum += info.mean_scale;
        ++scaled_params;
      }
    }
    rec.grad_norm = std::sqrt(grad_sq);
    rec.update_norm = std::sqrt(update_sq);
    rec.mean_scale = scaled_params > 0 ? scale_sum / static_cast<double>(scaled_params) : 0.0;
    trace.records.push_back(rec);
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "step,loss,grad_norm,mean_scale,limited\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.grad_norm);
    out += ',';
    out += format_double(r.mean_scale);
    out += ',';
    out += r.limited ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + tmp.string());
    out << trace_to_csv(trace);
  }
  fs::rename(tmp, target);
}

CompareTable compare(const std::vector<Task>& tasks,
                     const std::vector<OptimizerConfig>& configs,
                     const TrainOptions& options) {
  CompareTable table;
  for (int q = 1; q <= 4; ++q)
    table.checkpoint_steps.push_back(options.steps * q / 4);

  for (const Task& task : tasks) {
    for (const OptimizerConfig& cfg : configs) {
      CompareEntry entry;
      entry.task = task.name;
      entry.optimizer = variant_name(cfg.variant);
      entry.lr = cfg.lr;
      try {
        const TrainTrace trace = train(task, cfg, options);
        entry.final_loss = trace.final_loss();
        for (long cp : table.checkpoint_steps) {
          const std::size_t idx = static_cast<std::size_t>(std::max<long>(cp - 1, 0));
          entry.checkpoint_losses.push_back(trace.records[idx].loss);
        }
      } catch (const DivergenceError& e) {
        entry.diverged = true;
        entry.diverged_step = e.step();
        entry.final_loss = std::nan("");
        entry.checkpoint_losses.assign(table.checkpoint_steps.size(), std::nan(""));
      }
      table.entries.push_back(std::move(entry));
    }
  }
  return table;
}

std::string compare_to_csv(const CompareTable& table) {
  std::string out = "task,optimizer,lr,diverged,diverged_step,final_loss";
  for (long cp : table.checkpoint_steps) out += ",loss_at_" + std::to_string(cp);
  out += '\n';
  for (const CompareEntry& e : table.entries) {
    out += e.task + ',' + e.optimizer + ',' + format_double(e.lr) + ',';
    out += e.diverged ? '1' : '0';
    out += ',' + std::to_string(e.diverged_step) + ',' + format_double(e.final_loss);
    for (double v : e.checkpoint_losses) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace apollo
