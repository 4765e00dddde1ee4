#include "fogswitch/fogsim.hpp"

#include <algorithm>
#include <cmath>

#include "fogswitch/rng.hpp"

namespace fogswitch {

double analytic_rt(const FeatureVector& f, const MachineProfile& m, const RtModelParams& params) {
    double work = double(f.k) * double(f.it) * double(f.n) * double(f.d);
    double payload_bytes = 8.0 * f.n * f.d + double(params.payload_overhead_bytes);
    return params.beta_ms + params.alpha_ms * work / m.cpu_factor + 2.0 * m.rtt_ms +
           payload_bytes / m.bandwidth_bytes_per_ms;
}

LabeledDecision label_correct_decision(const std::map<std::string, double>& rts,
                                       const std::vector<ServiceInstance>& instances) {
    if (rts.empty())
        throw fog_error(errc::non_positive_param, "no response times to label");
    bool have = false;
    LabeledDecision best;
    double best_rt = 0;
    // std::map iterates ids lexicographically, so on exact ties the first
    // Edge-tier entry (or first entry overall within a tier) wins
    for (const auto& [id, rt] : rts) {
        const ServiceInstance* si = find_instance(instances, id);
        if (!si)
            throw fog_error(errc::unknown_instance, "no instance '" + id + "'");
        Tier tier = si->machine.tier;
        bool better = !have || rt < best_rt ||
                      (rt == best_rt && tier == Tier::Edge && best.tier == Tier::Remote);
        if (better) {
            have = true;
            best_rt = rt;
            best = {tier, id};
        }
    }
    return best;
}

std::vector<MonitoringRecord> generate_monitoring(const std::vector<FeatureVector>& workloads,
                                                  const std::vector<ServiceInstance>& instances,
                                                  MonitoringMode mode,
                                                  const RtModelParams& params,
                                                  std::uint64_t noise_seed,
                                                  double noise_sigma) {
    std::vector<const ServiceInstance*> order;
    order.reserve(instances.size());
    for (const auto& si : instances) order.push_back(&si);
    std::sort(order.begin(), order.end(),
              [](const ServiceInstance* a, const ServiceInstance* b) { return a->id < b->id; });

    std::vector<MonitoringRecord> records;
    records.reserve(workloads.size() * order.size());
    rng64 noise(noise_seed);
    for (std::size_t w = 0; w < workloads.size(); ++w) {
        for (const ServiceInstance* si : order) {
            double rt;
            if (mode == MonitoringMode::Analytic) {
                rt = analytic_rt(workloads[w], si->machine, params);
                if (noise_sigma > 0) rt *= std::exp(noise_sigma * noise.normal());
            } else {
                rt = measure_live_rt(*si, workloads[w], mix_seed(noise_seed, si->id) + w, 30000);
            }
            records.push_back({workloads[w], si->id, rt});
        }
    }
    return records;
}

WorkloadRanges default_workload_ranges() {
    WorkloadRanges r;
    r.n_bands.push_back({1, 999});
    for (int lo = 1000; lo <= 10000; lo += 1000) r.n_bands.push_back({lo, lo + 999});
    return r;
}

static void check_range(std::pair<int, int> r, const char* name) {
    if (r.first <= 0 || r.second < r.first)
        throw fog_error(errc::non_positive_param, std::string("bad range for ") + name);
}

std::vector<FeatureVector> sample_workloads(int count, const WorkloadRanges& ranges,
                                            std::uint64_t seed) {
    if (count < 0)
        throw fog_error(errc::non_positive_param, "negative workload count");
    if (ranges.n_bands.empty())
        throw fog_error(errc::non_positive_param, "no point-count bands");
    for (auto b : ranges.n_bands) check_range(b, "n band");
    check_range(ranges.d_range, "d");
    check_range(ranges.k_range, "k");
    check_range(ranges.it_range, "it");

    rng64 rng(seed);
    std::vector<FeatureVector> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        auto band = ranges.n_bands[i % ranges.n_bands.size()];
        FeatureVector f;
        f.n = int(rng.uniform_int(band.first, band.second));
        f.d = int(rng.uniform_int(ranges.d_range.first, ranges.d_range.second));
        f.k = int(rng.uniform_int(ranges.k_range.first, ranges.k_range.second));
        f.it = int(rng.uniform_int(ranges.it_range.first, ranges.it_range.second));
        if (f.k > f.n) f.k = f.n;
        out.push_back(f);
    }
    return out;
}

std::string serialize_monitoring(const std::vector<MonitoringRecord>& records) {
    std::string out = "k,it,n,d,instance_id,rt_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.features.k) + ',' + std::to_string(r.features.it) + ',' +
               std::to_string(r.features.n) + ',' + std::to_string(r.features.d) + ',' +
               r.instance_id + ',' + format_double(r.rt_ms) + '\n';
    }
    return out;
}

std::vector<MonitoringRecord> parse_monitoring(const std::string& text) {
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0] != "k,it,n,d,instance_id,rt_ms")
        throw fog_error(errc::malformed_row, "missing monitoring CSV header");
    std::vector<MonitoringRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = split(lines[i], ',');
        if (cells.size() != 6)
            throw fog_error(errc::malformed_row, "line " + std::to_string(i + 1) +
                                                     ": expected 6 cells");
        MonitoringRecord r;
        r.features.k = int(parse_long_strict(cells[0]));
        r.features.it = int(parse_long_strict(cells[1]));
        r.features.n = int(parse_long_strict(cells[2]));
        r.features.d = int(parse_long_strict(cells[3]));
        r.instance_id = cells[4];
        r.rt_ms = parse_double_strict(cells[5]);
        validate_features(r.features);
        if (!(r.rt_ms > 0))
            throw fog_error(errc::malformed_row, "line " + std::to_string(i + 1) +
                                                     ": rt_ms must be positive");
        out.push_back(std::move(r));
    }
    return out;
}

std::string serialize_workloads(const std::vector<FeatureVector>& workloads) {
    std::string out = "k,it,n,d\n";
    for (const auto& f : workloads)
        out += std::to_string(f.k) + ',' + std::to_string(f.it) + ',' + std::to_string(f.n) +
               ',' + std::to_string(f.d) + '\n';
    return out;
}

std::vector<FeatureVector> parse_workloads(const std::string& text) {
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0] != "k,it,n,d")
        throw fog_error(errc::malformed_row, "missing workload CSV header");
    std::vector<FeatureVector> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = split(lines[i], ',');
        if (cells.size() != 4)
            throw fog_error(errc::malformed_row, "line " + std::to_string(i + 1) +
                                                     ": expected 4 cells");
        FeatureVector f{int(parse_long_strict(cells[0])), int(parse_long_strict(cells[1])),
                        int(parse_long_strict(cells[2])), int(parse_long_strict(cells[3]))};
        validate_features(f);
        out.push_back(f);
    }
    return out;
}

}  // namespace fogswitch
