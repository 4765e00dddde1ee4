#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fogswitch/fogsim.hpp"
#include "fogswitch/predictors.hpp"

namespace fogswitch {

struct SwitchingDecision {
    std::string chosen_instance_id;
    std::map<std::string, double> predicted_rts;
    RegressorKind kind = RegressorKind::Knn;
    FeatureVector features;
    double plan_latency_ms = 0.0;
};

using ModelMap = std::map<std::string, TrainedModel>;

// partitions records by instance and trains one model per instance, one
// training task each (threads when parallel). per-instance seeds derive from
// (seed, instance id), so parallel and sequential runs produce identical bits.
// wall_ms, when given, receives each instance's training wall time.
ModelMap train_all(const std::vector<MonitoringRecord>& records,
                   const std::vector<ServiceInstance>& instances, RegressorKind kind,
                   std::uint64_t seed, bool parallel = true,
                   std::map<std::string, double>* wall_ms = nullptr);

// prediction mode: predict rt for every instance, pick the argmin. ties break
// toward the Edge tier, then lexicographic id. computation only — never
// touches the network.
SwitchingDecision plan(const FeatureVector& f, const ModelMap& models,
                       const std::vector<ServiceInstance>& instances);

// model directory: <dir>/<instance>.fsm + manifest.json (kind, seed, record
// counts, gamma for svr, architecture for nn)
void save_model_dir(const ModelMap& models, RegressorKind kind, std::uint64_t seed,
                    const std::map<std::string, std::size_t>& record_counts,
                    const std::string& dir);

struct ModelDir {
    RegressorKind kind = RegressorKind::Knn;
    std::uint64_t seed = 0;
    ModelMap models;
};

// throws ModelLoadFailure on a missing/corrupt file or kind mismatch
ModelDir load_model_dir(const std::string& dir);

std::map<std::string, std::size_t> count_records(const std::vector<MonitoringRecord>& records);

}  // namespace fogswitch
