#include "apollo/memory_model.hpp"

#include <algorithm>

#include "apollo/errors.hpp"

namespace apollo {

std::size_t ArchSpec::param_count() const {
  std::size_t total = 0;
  for (const TensorSpec& t : tensors) total += t.elements();
  return total;
}

ArchSpec transformer_arch(const std::string& name, std::size_t layers,
                          std::size_t hidden, std::size_t intermediate,
                          std::size_t vocab, std::size_t bytes_per_elem) {
  if (layers < 1) throw ConfigError("architecture needs at least one layer");
  if (hidden < 1 || intermediate < 1 || vocab < 1)
    throw ConfigError("architecture dimensions must be positive");

  ArchSpec arch;
  arch.name = name;
  arch.bytes_per_elem = bytes_per_elem;
  arch.tensors.push_back({"embed", vocab, hidden});
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (const char* proj : {"attn.q", "attn.k", "attn.v", "attn.o"})
      arch.tensors.push_back({prefix + proj, hidden, hidden});
    arch.tensors.push_back({prefix + "mlp.gate", intermediate, hidden});
    arch.tensors.push_back({prefix + "mlp.up", intermediate, hidden});
    arch.tensors.push_back({prefix + "mlp.down", hidden, intermediate});
    arch.tensors.push_back({prefix + "attn_norm", hidden, 1});
    arch.tensors.push_back({prefix + "mlp_norm", hidden, 1});
  }
  arch.tensors.push_back({"final_norm", hidden, 1});
  arch.tensors.push_back({"lm_head", vocab, hidden});
  return arch;
}

ArchSpec llama_arch(const std::string& size_tag, std::size_t vocab) {
  struct Preset {
    const char* tag;
    std::size_t hidden, intermediate, layers;
  };
  // Hidden/intermediate/depth presets for the usual pre-training ladder.
  static const Preset presets[] = {
      {"60m", 512, 1376, 8},    {"130m", 768, 2048, 12}, {"350m", 1024, 2736, 24},
      {"1b", 2048, 5461, 32},   {"7b", 4096, 11008, 32},
  };
  std::string tag = size_tag;
  std::transform(tag.begin(), tag.end(), tag.begin(), ::tolower);
  if (tag.rfind("llama", 0) == 0) tag = tag.substr(5);
  for (const Preset& p : presets) {
    if (tag == p.tag)
      return transformer_arch("llama-" + std::string(p.tag), p.layers, p.hidden,
                              p.intermediate, vocab);
  }
  throw ConfigError("unknown architecture size tag: " + size_tag);
}

MemoryReport estimate(const ArchSpec& arch, Variant variant, std::size_t rank) {
  const bool low_rank = variant == Variant::Apollo ||
                        variant == Variant::ApolloMini ||
                        variant == Variant::GaloreRp;
  return estimate(arch, variant, rank, low_rank ? 4 : arch.bytes_per_elem);
}

MemoryReport estimate(const ArchSpec& arch, Variant variant, std::size_t rank,
                      std::size_t state_bytes_per_elem) {
  const bool low_rank = variant == Variant::Apollo ||
                        variant == Variant::ApolloMini ||
                        variant == Variant::GaloreRp;
  if (low_rank && rank < 1) throw ConfigError("rank must be >= 1");
  if (variant == Variant::ApolloMini) rank = 1;

  if (low_rank) {
    std::string offending;
    for (const TensorSpec& t : arch.tensors) {
      if (t.is_matrix() && rank > std::min(t.rows, t.cols))
        offending += (offending.empty() ? "" : ", ") + t.name;
    }
    if (!offending.empty())
      throw ConfigError("rank " + std::to_string(rank) +
                        " exceeds the smaller dimension of: " + offending);
  }

  MemoryReport report;
  report.arch = arch.name;
  report.optimizer = variant_name(variant);
  report.rank = low_rank ? rank : 0;
  report.bytes_per_elem = arch.bytes_per_elem;
  report.state_bytes_per_elem = state_bytes_per_elem;

  for (const TensorSpec& t : arch.tensors) {
    TensorMemory tm;
    tm.name = t.name;
    tm.weight_bytes = t.elements() * arch.bytes_per_elem;
    if (t.is_matrix() && low_rank) {
      const std::size_t m = std::min(t.rows, t.cols);
      const std::size_t n = std::max(t.rows, t.cols);
      tm.state_elements = state_element_count(variant, m, n, rank);
      tm.state_bytes = tm.state_elements * state_bytes_per_elem;
    } else {
      // Full AdamW for everything else, including the vector fallback. Its
      // moments live in the weight dtype.
      tm.state_elements = state_element_count(
          variant == Variant::Sgd ? Variant::Sgd : Variant::AdamW,
          std::min(t.rows, t.cols), std::max(t.rows, t.cols), 1);
      tm.state_bytes = tm.state_elements * arch.bytes_per_elem;
    }
    report.weight_bytes += tm.weight_bytes;
    report.state_bytes += tm.state_bytes;
    report.per_tensor.push_back(std::move(tm));
  }
  return report;
}

}  // namespace apollo
