#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fogswitch/domain.hpp"
#include "fogswitch/fogsim.hpp"

namespace fogswitch {

// everything an operator can tune, read from one TOML-subset file.
// sections: [rt_model], [workloads], [experiment], [machine.<id>], [instance.<id>]
struct FogConfig {
    RtModelParams rt_params;
    double noise_sigma = 0.0;

    WorkloadRanges ranges;
    int workload_count = 778;
    int train_count = 578;

    std::uint64_t seed = 2459;
    std::string kind = "nn";  // default for evaluate/train when --kind is absent
    int timeout_ms = 30000;

    FogInfrastructure infrastructure;
    std::vector<ServiceInstance> instances;  // machine profiles resolved, api attached
};

// two-machine loopback setup matching the pinned profile defaults
FogConfig default_config();

// ConfigError on syntax errors, unknown keys, or schema violations
FogConfig parse_config(const std::string& text);

// IoFailure when the file cannot be read (message names the path)
FogConfig load_config(const std::string& path);

// canonical text form; parse_config(serialize_config(c)) reproduces c
std::string serialize_config(const FogConfig& cfg);

}  // namespace fogswitch
