#include "fogswitch/eval.hpp"

#include <cmath>

#include <json.hpp>

namespace fogswitch {

using nlohmann::json;

static double ratio(long num, long denom) {
    if (denom > 0) return double(num) / double(denom);
    return num == 0 ? 1.0 : 0.0;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() <= 0)
        throw fog_error(errc::empty_matrix, "confusion matrix has no decisions");
    MetricsReport r;
    r.confusion = cm;
    r.remote_precision = ratio(cm.true_remote, cm.true_remote + cm.false_remote);
    r.edge_precision = ratio(cm.true_edge, cm.true_edge + cm.false_edge);
    r.remote_recall = ratio(cm.true_remote, cm.true_remote + cm.false_edge);
    r.edge_recall = ratio(cm.true_edge, cm.true_edge + cm.false_remote);
    r.overall_accuracy = double(cm.true_remote + cm.true_edge) / double(cm.total());
    return r;
}

RtiReport compute_rti(const std::vector<DecisionOutcome>& decisions,
                      const std::vector<ServiceInstance>& instances) {
    RtiReport report;
    for (const auto& d : decisions) {
        double best_remote = 0;
        bool have_remote = false, have_edge = false;
        for (const auto& [id, rt] : d.measured_rts) {
            const ServiceInstance* si = find_instance(instances, id);
            if (!si)
                throw fog_error(errc::unknown_instance, "no instance '" + id + "'");
            if (si->machine.tier == Tier::Remote) {
                if (!have_remote || rt < best_remote) best_remote = rt;
                have_remote = true;
            } else {
                have_edge = true;
            }
        }
        if (!have_remote || !have_edge)
            throw fog_error(errc::missing_tier,
                            "decision lacks a measured rt for one of the tiers");
        if (d.chosen_tier != Tier::Edge) continue;
        auto it = d.measured_rts.find(d.chosen_instance);
        if (it == d.measured_rts.end())
            throw fog_error(errc::missing_tier,
                            "no measured rt for chosen instance '" + d.chosen_instance + "'");
        report.per_decision_rti.push_back((best_remote - it->second) / best_remote);
    }
    report.edge_decision_count = int(report.per_decision_rti.size());
    if (report.edge_decision_count > 0) {
        double sum = 0;
        for (double v : report.per_decision_rti) sum += v;
        report.average_edge_rti = sum / report.edge_decision_count;
    }
    return report;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.train_count < 1 || config.train_count >= config.workload_count)
        throw fog_error(errc::non_positive_param,
                        "need 1 <= train_count < workload_count");
    if (config.instances.empty())
        throw fog_error(errc::non_positive_param, "no instances configured");

    auto workloads = sample_workloads(config.workload_count, config.ranges, config.seed);
    auto records = generate_monitoring(workloads, config.instances, config.mode,
                                       config.rt_params, config.noise_seed, config.noise_sigma);
    const std::size_t per_workload = config.instances.size();

    std::vector<MonitoringRecord> train_records(
        records.begin(), records.begin() + long(config.train_count * per_workload));
    ModelMap models;
    if (!config.oracle_models)
        models = train_all(train_records, config.instances, config.kind, config.seed,
                           config.parallel_training);

    ExperimentResult result;
    result.kind = config.kind;
    result.oracle = config.oracle_models;
    result.seed = config.seed;
    result.train_count = config.train_count;
    result.test_count = config.workload_count - config.train_count;

    std::string csv = "idx,k,it,n,d,correct,predicted,chosen_instance,cum_accuracy,rti\n";
    std::vector<DecisionOutcome> outcomes;
    long correct_so_far = 0;
    for (int w = config.train_count; w < config.workload_count; ++w) {
        const FeatureVector& f = workloads[w];
        std::map<std::string, double> measured;
        for (std::size_t i = 0; i < per_workload; ++i) {
            const auto& rec = records[std::size_t(w) * per_workload + i];
            measured[rec.instance_id] = rec.rt_ms;
        }
        LabeledDecision truth = label_correct_decision(measured, config.instances);

        std::string chosen_id;
        if (config.oracle_models) {
            std::map<std::string, double> predicted;
            for (const auto& si : config.instances)
                predicted[si.id] = analytic_rt(f, si.machine, config.rt_params);
            chosen_id = label_correct_decision(predicted, config.instances).instance_id;
        } else {
            chosen_id = plan(f, models, config.instances).chosen_instance_id;
        }
        Tier chosen_tier = find_instance(config.instances, chosen_id)->machine.tier;

        if (truth.tier == Tier::Remote) {
            if (chosen_tier == Tier::Remote) result.metrics.confusion.true_remote++;
            else result.metrics.confusion.false_edge++;
        } else {
            if (chosen_tier == Tier::Edge) result.metrics.confusion.true_edge++;
            else result.metrics.confusion.false_remote++;
        }

        DecisionOutcome outcome{chosen_tier, chosen_id, measured};
        double rti = 0;
        bool has_rti = chosen_tier == Tier::Edge;
        if (has_rti) {
            double best_remote = 0;
            bool have = false;
            for (const auto& [id, rt] : measured) {
                if (find_instance(config.instances, id)->machine.tier == Tier::Remote &&
                    (!have || rt < best_remote)) {
                    best_remote = rt;
                    have = true;
                }
            }
            has_rti = have;
            if (have) rti = (best_remote - measured.at(chosen_id)) / best_remote;
        }
        outcomes.push_back(std::move(outcome));

        bool correct = chosen_tier == truth.tier;
        if (correct) correct_so_far++;
        long decided = w - config.train_count + 1;
        csv += std::to_string(w) + ',' + std::to_string(f.k) + ',' + std::to_string(f.it) +
               ',' + std::to_string(f.n) + ',' + std::to_string(f.d) + ',' +
               tier_name(truth.tier) + ',' + tier_name(chosen_tier) + ',' + chosen_id + ',' +
               format_double(double(correct_so_far) / double(decided)) + ',' +
               (has_rti ? format_double(rti) : std::string()) + '\n';
    }

    result.metrics = compute_metrics(result.metrics.confusion);
    result.rti = compute_rti(outcomes, config.instances);
    result.decisions_csv = std::move(csv);

    // accuracy computed two ways must agree (matrix cells vs running count)
    double by_count = double(correct_so_far) / double(result.test_count);
    if (std::fabs(by_count - result.metrics.overall_accuracy) > 1e-12)
        throw fog_error(errc::non_positive_param, "internal accuracy cross-check failed");
    return result;
}

std::string experiment_report_json(const ExperimentResult& result) {
    json j;
    j["kind"] = result.oracle ? "oracle" : kind_name(result.kind);
    j["oracle"] = result.oracle;
    j["seed"] = result.seed;
    j["train_count"] = result.train_count;
    j["test_count"] = result.test_count;
    j["metrics"] = {
        {"remote_precision", result.metrics.remote_precision},
        {"edge_precision", result.metrics.edge_precision},
        {"remote_recall", result.metrics.remote_recall},
        {"edge_recall", result.metrics.edge_recall},
        {"overall_accuracy", result.metrics.overall_accuracy},
        {"confusion",
         {{"true_remote", result.metrics.confusion.true_remote},
          {"false_edge", result.metrics.confusion.false_edge},
          {"false_remote", result.metrics.confusion.false_remote},
          {"true_edge", result.metrics.confusion.true_edge}}},
    };
    j["rti"] = {
        {"average_edge_rti", result.rti.average_edge_rti},
        {"edge_decision_count", result.rti.edge_decision_count},
    };
    return j.dump(2) + "\n";
}

}  // namespace fogswitch
