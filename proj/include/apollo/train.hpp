#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "apollo/optimizers.hpp"
#include "apollo/tasks.hpp"

namespace apollo {

struct TraceRecord {
  long step = 0;
  double loss = 0.0;       // loss before this step's update
  double grad_norm = 0.0;  // Frobenius norm over all parameter gradients
  double mean_scale = 0.0; // mean channel scale across matrix parameters
  bool limited = false;    // growth limiter clipped some parameter
  double update_norm = 0.0;
};

struct TrainTrace {
  std::string task_name;
  OptimizerConfig config;
  long steps = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  double wall_seconds = 0.0;

  double final_loss() const;
};

enum class LrSchedule { Constant, WarmupCosine };

struct TrainOptions {
  long steps = 100;
  std::uint64_t seed = 0;
  // WarmupCosine ramps linearly over the first 10% of steps, then anneals
  // to 10% of the peak rate.
  LrSchedule schedule = LrSchedule::Constant;
};

double lr_multiplier(LrSchedule schedule, long step, long total_steps);

/// Routes each parameter to the configured variant; vectors and scalars
/// (rows or cols == 1) fall back to full AdamW, whose state for them is
/// negligible. Owns per-parameter state across steps; projector seeds are
/// derived from (run seed, parameter index), never from iteration order.
class ParamwiseOptimizer {
 public:
  ParamwiseOptimizer(OptimizerConfig cfg, std::uint64_t seed);

  StepInfo step(std::size_t param_index, Matrix& w, const Matrix& g,
                double lr_mult = 1.0);

  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::uint64_t seed_;
  std::vector<std::optional<std::variant<AdamWState, ApolloState>>> states_;
};

/// Runs `options.steps` optimizer steps on the task. Deterministic given
/// (task, cfg, options). Throws DivergenceError when the loss becomes
/// non-finite or exceeds 1e12.
TrainTrace train(const Task& task, const OptimizerConfig& cfg,
                 const TrainOptions& options);

/// CSV with header step,loss,grad_norm,mean_scale,limited; byte-stable for
/// identical runs.
std::string trace_to_csv(const TrainTrace& trace);

/// Writes the CSV trace atomically (write to a temp file, then rename).
void write_trace_csv(const TrainTrace& trace, const std::string& path);

struct CompareEntry {
  std::string task;
  std::string optimizer;
  double lr = 0.0;
  bool diverged = false;
  long diverged_step = -1;
  double final_loss = 0.0;
  std::vector<double> checkpoint_losses;
};

struct CompareTable {
  std::vector<long> checkpoint_steps;
  std::vector<CompareEntry> entries;
};

/// Cross product of tasks and configs. Divergent runs are marked in their
/// row instead of aborting the table.
CompareTable compare(const std::vector<Task>& tasks,
                     const std::vector<OptimizerConfig>& configs,
                     const TrainOptions& options);

std::string compare_to_csv(const CompareTable& table);

}  // namespace apollo
