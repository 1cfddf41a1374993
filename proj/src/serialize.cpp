#include "apollo/serialize.hpp"

namespace apollo {

using nlohmann::json;

void to_json(json& j, const OptimizerConfig& cfg) {
  j = json{
      {"variant", variant_name(cfg.variant)},
      {"lr", cfg.lr},
      {"scale", cfg.scale},
      {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},
      {"epsilon", cfg.epsilon},
      {"weight_decay", cfg.weight_decay},
      {"rank", cfg.rank},
      {"period", cfg.period},
      {"bias_correction", cfg.bias_correction},
      {"projector", projector_kind_name(cfg.projector)},
  };
  if (cfg.growth_limit)
    j["growth_limit"] = *cfg.growth_limit;
  else
    j["growth_limit"] = nullptr;
}

void to_json(json& j, const BoundCheckReport& r) {
  j = json{{"check", r.check},
           {"trials", r.trials},
           {"epsilon", r.epsilon},
           {"bound", r.bound},
           {"slack", r.slack},
           {"empirical_failure_rate", r.empirical_failure_rate},
           {"pass", r.pass},
           {"params", r.params}};
}

void to_json(json& j, const IdentityCheckReport& r) {
  j = json{{"check", r.check},
           {"max_rel_error", r.max_rel_error},
           {"tolerance", r.tolerance},
           {"pass", r.pass},
           {"params", r.params}};
}

void to_json(json& j, const RatioBoundReport& r) {
  j = json{{"check", r.check},
           {"trials", r.trials},
           {"steps", r.steps},
           {"burn_in", r.burn_in},
           {"compensation", r.compensation},
           {"compensation_channel_axis", r.compensation_channel_axis},
           {"median", r.median},
           {"median_channel_axis", r.median_channel_axis},
           {"p5", r.p5},
           {"p95", r.p95},
           {"fraction_in_loose_bracket", r.fraction_in_loose_bracket},
           {"pass", r.pass},
           {"params", r.params}};
}

void to_json(json& j, const GradientCheckReport& r) {
  j = json{{"check", "gradient-check"},
           {"task", r.task},
           {"max_rel_error", r.max_rel_error},
           {"tolerance", r.tolerance},
           {"points", r.points},
           {"pass", r.pass}};
}

void to_json(json& j, const TensorMemory& t) {
  j = json{{"name", t.name},
           {"weight_bytes", t.weight_bytes},
           {"state_bytes", t.state_bytes},
           {"state_elements", t.state_elements}};
}

void to_json(json& j, const MemoryReport& r) {
  j = json{{"arch", r.arch},
           {"optimizer", r.optimizer},
           {"rank", r.rank},
           {"bytes_per_elem", r.bytes_per_elem},
           {"state_bytes_per_elem", r.state_bytes_per_elem},
           {"weight_bytes", r.weight_bytes},
           {"state_bytes", r.state_bytes},
           {"total_bytes", r.total_bytes()},
           {"total_gb", r.total_gb()},
           {"per_tensor", r.per_tensor}};
}

void to_json(json& j, const CompareEntry& e) {
  j = json{{"task", e.task},
           {"optimizer", e.optimizer},
           {"lr", e.lr},
           {"diverged", e.diverged},
           {"diverged_step", e.diverged_step},
           {"final_loss", e.final_loss},
           {"checkpoint_losses", e.checkpoint_losses}};
}

void to_json(json& j, const CompareTable& t) {
  j = json{{"checkpoint_steps", t.checkpoint_steps}, {"entries", t.entries}};
}

json trace_config_snapshot(const TrainTrace& trace) {
  return json{{"task", trace.task_name},
              {"optimizer", trace.config},
              {"steps", trace.steps},
              {"seed", trace.seed}};
}

ArchSpec arch_from_json(const json& j) {
  const std::string name = j.value("name", "custom");
  const std::size_t layers = j.at("layers").get<std::size_t>();
  const std::size_t hidden = j.at("hidden").get<std::size_t>();
  const std::size_t intermediate = j.at("intermediate").get<std::size_t>();
  const std::size_t vocab = j.value("vocab", std::size_t{32000});
  const std::size_t bytes = j.value("bytes_per_elem", std::size_t{2});
  return transformer_arch(name, layers, hidden, intermediate, vocab, bytes);
}

}  // namespace apollo
