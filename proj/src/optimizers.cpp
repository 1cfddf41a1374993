#include "apollo/optimizers.hpp"

#include <cmath>
#include <numeric>

#include "apollo/errors.hpp"

namespace apollo {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::AdamW: return "adamw";
    case Variant::Sgd: return "sgd";
    case Variant::Apollo: return "apollo";
    case Variant::ApolloMini: return "apollo-mini";
    case Variant::GaloreRp: return "galore-rp";
  }
  return "unknown";
}

Variant variant_from_name(const std::string& name) {
  if (name == "adamw") return Variant::AdamW;
  if (name == "sgd") return Variant::Sgd;
  if (name == "apollo") return Variant::Apollo;
  if (name == "apollo-mini") return Variant::ApolloMini;
  if (name == "galore-rp") return Variant::GaloreRp;
  throw ConfigError("unknown optimizer variant: " + name);
}

OptimizerConfig OptimizerConfig::adamw(double lr) {
  OptimizerConfig c;
  c.variant = Variant::AdamW;
  c.lr = lr;
  return c;
}

OptimizerConfig OptimizerConfig::sgd(double lr) {
  OptimizerConfig c;
  c.variant = Variant::Sgd;
  c.lr = lr;
  return c;
}

OptimizerConfig OptimizerConfig::apollo(double lr, std::size_t rank) {
  OptimizerConfig c;
  c.variant = Variant::Apollo;
  c.lr = lr;
  c.rank = rank;
  c.scale = 1.0;
  c.growth_limit = 1.01;
  return c;
}

OptimizerConfig OptimizerConfig::apollo_mini(double lr) {
  OptimizerConfig c;
  c.variant = Variant::ApolloMini;
  c.lr = lr;
  c.rank = 1;
  c.scale = std::sqrt(128.0);
  c.growth_limit = 1.01;
  return c;
}

OptimizerConfig OptimizerConfig::galore_rp(double lr, std::size_t rank) {
  OptimizerConfig c;
  c.variant = Variant::GaloreRp;
  c.lr = lr;
  c.rank = rank;
  return c;
}

void OptimizerConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(scale > 0.0)) throw ConfigError("scale factor must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("beta1 must lie in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (growth_limit && !(*growth_limit > 1.0))
    throw ConfigError("growth limit gamma must exceed 1");
  if (rank < 1) throw ConfigError("rank must be >= 1");
  if (variant == Variant::ApolloMini && rank != 1)
    throw ConfigError("apollo-mini requires rank 1");
  if (period < 1) throw ConfigError("projector refresh period must be >= 1");
}

AdamWState make_adamw_state(std::size_t rows, std::size_t cols) {
  AdamWState st;
  st.m = Matrix(rows, cols);
  st.v = Matrix(rows, cols);
  return st;
}

ApolloState make_apollo_state(const OptimizerConfig& cfg, std::uint64_t base_seed,
                              std::uint64_t param_id, std::size_t rows,
                              std::size_t cols) {
  cfg.validate();
  ApolloState st;
  st.projector = make_projector(cfg.projector, cfg.rank, cfg.period, base_seed,
                                param_id, rows, cols);
  st.m = Matrix(cfg.rank, st.projector.d_large());
  st.v = Matrix(cfg.rank, st.projector.d_large());
  return st;
}

namespace {

void check_shapes(const Matrix& w, const Matrix& g) {
  if (!w.same_shape(g))
    throw DimensionError("weight and gradient shapes disagree");
}

// m = beta1*m + (1-beta1)*g, v = beta2*v + (1-beta2)*g^2, in place.
void moment_update(Matrix& m, Matrix& v, const Matrix& g, double beta1,
                   double beta2) {
  auto md = m.data();
  auto vd = v.data();
  auto gd = g.data();
  for (std::size_t i = 0; i < gd.size(); ++i) {
    md[i] = beta1 * md[i] + (1.0 - beta1) * gd[i];
    vd[i] = beta2 * vd[i] + (1.0 - beta2) * gd[i] * gd[i];
  }
}

// m_hat / (sqrt(v_hat) + eps) with the bias corrections already folded in.
Matrix adapted_update(const Matrix& m, const Matrix& v, double bc1, double bc2,
                      double eps) {
  Matrix out(m.rows(), m.cols());
  auto md = m.data();
  auto vd = v.data();
  auto od = out.data();
  for (std::size_t i = 0; i < md.size(); ++i)
    od[i] = (md[i] / bc1) / (std::sqrt(vd[i] / bc2) + eps);
  return out;
}

double bias_factor(bool enabled, double beta, long t) {
  return enabled ? 1.0 - std::pow(beta, static_cast<double>(t)) : 1.0;
}

// w = (1 - lr*wd) * w - lr * update (decoupled decay).
void apply_update(Matrix& w, const Matrix& update, double lr, double wd) {
  auto wd_span = w.data();
  auto ud = update.data();
  const double keep = 1.0 - lr * wd;
  for (std::size_t i = 0; i < wd_span.size(); ++i)
    wd_span[i] = keep * wd_span[i] - lr * ud[i];
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Steps 5..8 shared by apollo_step and the channel-wise reference: scale
// the raw gradient, limit its growth, apply it with decoupled decay and
// record the norm the limiter will compare against next step.
StepInfo finish_structured_step(Matrix& w, const Matrix& g,
                                std::vector<double> scales, bool tensor_wise,
                                Orientation orientation,
                                std::optional<double>& prev_update_norm,
                                const OptimizerConfig& cfg) {
  Matrix update = tensor_wise ? apply_scaling(g, scales[0])
                              : apply_scaling(g, scales, orientation);
  scale_inplace(update, cfg.scale);
  LimiterResult lim{fro_norm(update), false};
  if (cfg.growth_limit)
    lim = norm_growth_limiter(update, prev_update_norm, *cfg.growth_limit);
  apply_update(w, update, cfg.lr, cfg.weight_decay);
  prev_update_norm = lim.norm;
  StepInfo info;
  info.mean_scale = mean_of(scales);
  info.scales = std::move(scales);
  info.update_norm = lim.norm;
  info.limited = lim.limited;
  return info;
}

}  // namespace

LimiterResult norm_growth_limiter(Matrix& update, std::optional<double> prev_norm,
                                  double gamma) {
  if (!(gamma > 1.0)) throw ConfigError("growth limit gamma must exceed 1");
  const double norm = fro_norm(update);
  // A missing or zero previous norm gives no growth reference.
  if (!prev_norm || *prev_norm <= 0.0 || norm <= gamma * *prev_norm)
    return {norm, false};
  const double target = gamma * *prev_norm;
  scale_inplace(update, target / norm);
  return {target, true};
}

StepInfo adamw_step(Matrix& w, const Matrix& g, AdamWState& state,
                    const OptimizerConfig& cfg) {
  check_shapes(w, g);
  check_shapes(state.m, g);
  moment_update(state.m, state.v, g, cfg.beta1, cfg.beta2);
  const long t = state.step + 1;
  Matrix update = adapted_update(state.m, state.v,
                                 bias_factor(cfg.bias_correction, cfg.beta1, t),
                                 bias_factor(cfg.bias_correction, cfg.beta2, t),
                                 cfg.epsilon);
  apply_update(w, update, cfg.lr, cfg.weight_decay);
  state.step = t;
  StepInfo info;
  info.update_norm = fro_norm(update);
  return info;
}

StepInfo structured_adamw_step(Matrix& w, const Matrix& g, AdamWState& state,
                               const OptimizerConfig& cfg) {
  check_shapes(w, g);
  check_shapes(state.m, g);
  moment_update(state.m, state.v, g, cfg.beta1, cfg.beta2);
  const long t = state.step + 1;
  Matrix adapted = adapted_update(state.m, state.v,
                                  bias_factor(cfg.bias_correction, cfg.beta1, t),
                                  bias_factor(cfg.bias_correction, cfg.beta2, t),
                                  cfg.epsilon);
  const Orientation orientation = orientation_for(g.rows(), g.cols());
  const std::vector<double> numer = channel_norms(adapted, orientation);
  const std::vector<double> denom = channel_norms(g, orientation);
  std::vector<double> scales(numer.size());
  for (std::size_t j = 0; j < scales.size(); ++j)
    scales[j] = numer[j] / (denom[j] + cfg.epsilon);
  state.step = t;
  return finish_structured_step(w, g, std::move(scales), /*tensor_wise=*/false,
                                orientation, state.prev_update_norm, cfg);
}

StepInfo apollo_step(Matrix& w, const Matrix& g, ApolloState& state,
                     const OptimizerConfig& cfg) {
  if (cfg.variant != Variant::Apollo && cfg.variant != Variant::ApolloMini)
    throw ConfigError("apollo_step requires the apollo or apollo-mini variant");
  check_shapes(w, g);
  refresh_if_due(state.projector, state.step, g);
  const Matrix r = project(state.projector, g);
  check_shapes(state.m, r);
  moment_update(state.m, state.v, r, cfg.beta1, cfg.beta2);
  const long t = state.step + 1;
  const Matrix adapted = adapted_update(state.m, state.v,
                                        bias_factor(cfg.bias_correction, cfg.beta1, t),
                                        bias_factor(cfg.bias_correction, cfg.beta2, t),
                                        cfg.epsilon);
  const bool tensor_wise = cfg.variant == Variant::ApolloMini;
  std::vector<double> scales;
  if (tensor_wise) {
    scales.push_back(fro_norm(adapted) / (fro_norm(r) + cfg.epsilon));
  } else {
    const std::vector<double> numer = col_norms(adapted);
    const std::vector<double> denom = col_norms(r);
    scales.resize(numer.size());
    for (std::size_t j = 0; j < scales.size(); ++j)
      scales[j] = numer[j] / (denom[j] + cfg.epsilon);
  }
  state.step = t;
  return finish_structured_step(w, g, std::move(scales), tensor_wise,
                                state.projector.orientation,
                                state.prev_update_norm, cfg);
}

StepInfo sgd_step(Matrix& w, const Matrix& g, const OptimizerConfig& cfg) {
  check_shapes(w, g);
  apply_update(w, g, cfg.lr, cfg.weight_decay);
  StepInfo info;
  info.update_norm = fro_norm(g);
  return info;
}

StepInfo galore_rp_step(Matrix& w, const Matrix& g, ApolloState& state,
                        const OptimizerConfig& cfg) {
  check_shapes(w, g);
  refresh_if_due(state.projector, state.step, g);
  const Matrix r = project(state.projector, g);
  check_shapes(state.m, r);
  // Moments survive projector refreshes; the subspace simply rotates under
  // them.
  moment_update(state.m, state.v, r, cfg.beta1, cfg.beta2);
  const long t = state.step + 1;
  const Matrix low_rank_update =
      adapted_update(state.m, state.v,
                     bias_factor(cfg.bias_correction, cfg.beta1, t),
                     bias_factor(cfg.bias_correction, cfg.beta2, t), cfg.epsilon);
  Matrix update = project_back(state.projector, low_rank_update);
  scale_inplace(update, cfg.scale);
  apply_update(w, update, cfg.lr, cfg.weight_decay);
  state.step = t;
  StepInfo info;
  info.update_norm = fro_norm(update);
  return info;
}

std::size_t state_element_count(Variant v, std::size_t m, std::size_t n,
                                std::size_t r) {
  if (m > n) throw ConfigError("state_element_count expects m <= n");
  if (r < 1) throw ConfigError("rank must be >= 1");
  switch (v) {
    case Variant::AdamW: return 2 * m * n;
    case Variant::Sgd: return 0;
    case Variant::Apollo: return 2 * n * r + 2;
    case Variant::ApolloMini: return 2 * n + 2;
    case Variant::GaloreRp: return m * r + 2 * n * r;
  }
  throw ConfigError("unknown optimizer variant");
}

}  // namespace apollo
