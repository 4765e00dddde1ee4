#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fogswitch/domain.hpp"

namespace fogswitch {

// response-time model of one service call:
//   rt = beta + alpha*k*it*n*d / cpu_factor + 2*rtt + payload/bandwidth
struct RtModelParams {
    double alpha_ms = 6e-6;          // compute cost per k*it*n*d unit at cpu_factor 1
    double beta_ms = 2.0;            // fixed service overhead
    long payload_overhead_bytes = 256;
};

struct MonitoringRecord {
    FeatureVector features;
    std::string instance_id;
    double rt_ms = 0.0;
};

double analytic_rt(const FeatureVector& f, const MachineProfile& m, const RtModelParams& params);

struct LabeledDecision {
    Tier tier = Tier::Edge;
    std::string instance_id;
};

// winner = argmin measured rt; class = winner's machine tier.
// ties break toward Edge, then lexicographic instance id.
LabeledDecision label_correct_decision(const std::map<std::string, double>& rts,
                                       const std::vector<ServiceInstance>& instances);

enum class MonitoringMode { Analytic, Live };

// one record per (workload x instance), ordered by (workload index, instance id).
// Analytic mode evaluates the formula, times exp(sigma*normal) when sigma > 0.
// Live mode posts a real /cluster request and measures the round trip.
std::vector<MonitoringRecord> generate_monitoring(const std::vector<FeatureVector>& workloads,
                                                  const std::vector<ServiceInstance>& instances,
                                                  MonitoringMode mode,
                                                  const RtModelParams& params,
                                                  std::uint64_t noise_seed,
                                                  double noise_sigma = 0.0);

// defined by the HTTP layer; posts a synthetic n x d dataset and returns wall-clock ms
double measure_live_rt(const ServiceInstance& instance, const FeatureVector& f,
                       std::uint64_t seed, int timeout_ms);

struct WorkloadRanges {
    std::vector<std::pair<int, int>> n_bands;  // stratified point-count bands
    std::pair<int, int> d_range{3, 14};
    std::pair<int, int> k_range{2, 10};
    std::pair<int, int> it_range{10, 200};
};

// eleven bands: [1,999], [1000,1999], ..., [10000,10999]
WorkloadRanges default_workload_ranges();

// bands are visited round-robin (sample i draws from band i mod #bands), so
// any prefix/suffix split of the list stays stratified. k clamps to n.
std::vector<FeatureVector> sample_workloads(int count, const WorkloadRanges& ranges,
                                            std::uint64_t seed);

// monitoring CSV: header `k,it,n,d,instance_id,rt_ms`
std::string serialize_monitoring(const std::vector<MonitoringRecord>& records);
std::vector<MonitoringRecord> parse_monitoring(const std::string& text);

// workload CSV: header `k,it,n,d`
std::string serialize_workloads(const std::vector<FeatureVector>& workloads);
std::vector<FeatureVector> parse_workloads(const std::string& text);

}  // namespace fogswitch
