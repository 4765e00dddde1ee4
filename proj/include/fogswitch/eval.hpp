#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fogswitch/fogsim.hpp"
#include "fogswitch/planner.hpp"

namespace fogswitch {

// rows = correct class, columns = predicted class
struct ConfusionMatrix {
    long true_remote = 0;   // correct remote, predicted remote
    long false_edge = 0;    // correct remote, predicted edge
    long false_remote = 0;  // correct edge, predicted remote
    long true_edge = 0;     // correct edge, predicted edge

    long total() const { return true_remote + false_edge + false_remote + true_edge; }
};

struct MetricsReport {
    double remote_precision = 0;
    double edge_precision = 0;
    double remote_recall = 0;
    double edge_recall = 0;
    double overall_accuracy = 0;
    ConfusionMatrix confusion;
};

// 0/0 ratios resolve to 1.0 (an empty error class should not tank a metric)
MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct RtiReport {
    std::vector<double> per_decision_rti;  // edge-chosen decisions only
    double average_edge_rti = 0.0;
    int edge_decision_count = 0;
};

struct DecisionOutcome {
    Tier chosen_tier = Tier::Edge;
    std::string chosen_instance;
    std::map<std::string, double> measured_rts;
};

// rti = (best remote rt - chosen edge rt) / best remote rt for edge-chosen
// decisions (negative when edge was the wrong call); remote-chosen decisions
// contribute nothing
RtiReport compute_rti(const std::vector<DecisionOutcome>& decisions,
                      const std::vector<ServiceInstance>& instances);

struct ExperimentConfig {
    std::vector<ServiceInstance> instances;
    RegressorKind kind = RegressorKind::Knn;
    bool oracle_models = false;  // replace models by the analytic formula itself
    int workload_count = 778;
    int train_count = 578;
    std::uint64_t seed = 2459;
    std::uint64_t noise_seed = 1;
    double noise_sigma = 0.0;
    MonitoringMode mode = MonitoringMode::Analytic;
    RtModelParams rt_params;
    WorkloadRanges ranges = default_workload_ranges();
    bool parallel_training = true;
};

struct ExperimentResult {
    RegressorKind kind = RegressorKind::Knn;
    bool oracle = false;
    std::uint64_t seed = 0;
    int train_count = 0;
    int test_count = 0;
    MetricsReport metrics;
    RtiReport rti;
    std::string decisions_csv;  // header idx,k,it,n,d,correct,predicted,chosen_instance,cum_accuracy,rti
};

// samples workloads, trains on the first train_count, and replays the rest
// as live switching decisions against ground-truth response times
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string experiment_report_json(const ExperimentResult& result);

}  // namespace fogswitch
