#pragma once

#include <json.hpp>

#include "apollo/memory_model.hpp"
#include "apollo/optimizers.hpp"
#include "apollo/tasks.hpp"
#include "apollo/theory_checks.hpp"
#include "apollo/train.hpp"

namespace apollo {

void to_json(nlohmann::json& j, const OptimizerConfig& cfg);

void to_json(nlohmann::json& j, const BoundCheckReport& r);
void to_json(nlohmann::json& j, const IdentityCheckReport& r);
void to_json(nlohmann::json& j, const RatioBoundReport& r);
void to_json(nlohmann::json& j, const GradientCheckReport& r);

void to_json(nlohmann::json& j, const TensorMemory& t);
void to_json(nlohmann::json& j, const MemoryReport& r);

void to_json(nlohmann::json& j, const CompareEntry& e);
void to_json(nlohmann::json& j, const CompareTable& t);

/// Config snapshot written next to a CSV trace (same stem, .json suffix).
nlohmann::json trace_config_snapshot(const TrainTrace& trace);

/// Parses an architecture description with keys name, layers, hidden,
/// intermediate, vocab (optional, default 32000) and bytes_per_elem
/// (optional, default 2).
ArchSpec arch_from_json(const nlohmann::json& j);

}  // namespace apollo
