#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "apollo/optimizers.hpp"

namespace apollo {

struct TensorSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 1;  // 1 for vectors and scalars

  std::size_t elements() const { return rows * cols; }
  bool is_matrix() const { return rows > 1 && cols > 1; }
};

/// Named architecture: the list of parameter tensors plus the storage
/// width of a weight element (2 bytes for BF16 by default).
struct ArchSpec {
  std::string name;
  std::vector<TensorSpec> tensors;
  std::size_t bytes_per_elem = 2;

  std::size_t param_count() const;
};

/// Decoder-style transformer family used by the bundled presets: per layer
/// four hidden x hidden attention projections, a gated MLP (two
/// intermediate x hidden matrices plus one transposed), two norm vectors;
/// plus tied-size embedding and output head (vocab x hidden) and a final
/// norm. Known size tags: 60m, 130m, 350m, 1b, 7b.
ArchSpec llama_arch(const std::string& size_tag, std::size_t vocab = 32000);

/// Builds the same layered layout from explicit dimensions.
ArchSpec transformer_arch(const std::string& name, std::size_t layers,
                          std::size_t hidden, std::size_t intermediate,
                          std::size_t vocab, std::size_t bytes_per_elem = 2);

struct TensorMemory {
  std::string name;
  std::size_t weight_bytes = 0;
  std::size_t state_bytes = 0;
  std::size_t state_elements = 0;
};

struct MemoryReport {
  std::string arch;
  std::string optimizer;
  std::size_t rank = 0;
  std::size_t bytes_per_elem = 0;
  std::size_t state_bytes_per_elem = 0;
  std::size_t weight_bytes = 0;
  std::size_t state_bytes = 0;
  std::vector<TensorMemory> per_tensor;

  std::size_t total_bytes() const { return weight_bytes + state_bytes; }
  double total_gb() const { return static_cast<double>(total_bytes()) / 1e9; }
};

/// Weight plus optimizer-state footprint. Matrix tensors are charged the
/// per-variant state element count at the given rank; vectors and scalars
/// are charged full AdamW state, matching the optimizer's fallback.
///
/// State element width: full AdamW (and the vector fallback) stores its
/// moments in the weight dtype, so its states follow bytes_per_elem. The
/// low-rank variants keep their auxiliary moments and projections in FP32
/// regardless of the training dtype, so their states are charged 4 bytes.
/// Pass state_bytes_per_elem explicitly to override.
MemoryReport estimate(const ArchSpec& arch, Variant variant, std::size_t rank);
MemoryReport estimate(const ArchSpec& arch, Variant variant, std::size_t rank,
                      std::size_t state_bytes_per_elem);

}  // namespace apollo
