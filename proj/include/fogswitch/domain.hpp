#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fogswitch/errors.hpp"

namespace fogswitch {

// ---- service description ---------------------------------------------------

enum class ParamTag { Int, Long, Double, String, Bool };

// a parameter is either a primitive with a builtin type tag or a named
// grouping of nested parameters (finite nesting by construction)
struct Parameter {
    std::string name;
    bool primitive = true;
    ParamTag tag = ParamTag::Double;       // primitive only
    std::string grouping;                  // complex only
    std::vector<Parameter> nested;         // complex only
};

struct ApiOperation {
    std::string name;
    std::vector<Parameter> inputs;
    std::vector<Parameter> outputs;
};

enum class ApiStyle { Rest, Soap };

struct WebApi {
    std::string name;
    std::vector<ApiOperation> ops;
    ApiStyle style = ApiStyle::Rest;
    std::string credentials;  // carried opaquely, never interpreted
};

// throws on empty name/ops or duplicate operation/parameter names
void validate_api(const WebApi& api);

// the one analytics API every instance serves: POST /cluster
WebApi make_cluster_api();

// ---- infrastructure ---------------------------------------------------------

enum class Tier { Edge, Remote };

inline const char* tier_name(Tier t) { return t == Tier::Edge ? "edge" : "remote"; }

struct MachineProfile {
    std::string id;
    Tier tier = Tier::Edge;
    double cpu_factor = 1.0;              // relative compute speed, 1.0 = reference
    double rtt_ms = 0.0;                  // edge machines pin this to 0
    double bandwidth_bytes_per_ms = 1e12;
};

struct FogInfrastructure {
    std::vector<MachineProfile> edge_machines;
    std::vector<MachineProfile> remote_machines;

    const MachineProfile* find(const std::string& id) const;
};

// throws on empty infrastructure, duplicate machine ids, tier/list mismatch,
// non-positive cpu factor/bandwidth, or edge rtt != 0
void validate_infrastructure(const FogInfrastructure& infra);

struct TrainedModel;  // predictors.hpp

struct ServiceInstance {
    std::string id;
    WebApi api;
    std::string uri;  // scheme://host:port/path
    MachineProfile machine;
    std::shared_ptr<const TrainedModel> model;  // optional, attached after training
};

const ServiceInstance* find_instance(const std::vector<ServiceInstance>& instances,
                                     const std::string& id);

// ---- workload features -------------------------------------------------------

// independent variables of the response-time models, fixed order (k, it, n, d)
struct FeatureVector {
    int k = 1;   // clusters
    int it = 1;  // iteration budget
    int n = 1;   // data points
    int d = 1;   // point dimension

    std::vector<double> row() const { return {double(k), double(it), double(n), double(d)}; }
    bool operator==(const FeatureVector&) const = default;
};

// throws NonPositiveParam unless all four are positive and k <= n
void validate_features(const FeatureVector& f);

// ---- datasets ----------------------------------------------------------------

using Dataset = std::vector<std::vector<double>>;

// shape-only: point values never matter, just counts and the shared dimension
FeatureVector extract_features(int k, int it, const Dataset& points);

// CSV, one point per row, comma-separated doubles, no header, LF endings
Dataset parse_dataset(const std::string& text);
std::string serialize_dataset(const Dataset& points);

// ---- number formatting ---------------------------------------------------------

// shortest round-trip decimal form (the only formatting used in artifacts,
// so re-runs are byte-identical)
std::string format_double(double v);
double parse_double_strict(const std::string& s);  // MalformedRow on junk
long parse_long_strict(const std::string& s);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace fogswitch
