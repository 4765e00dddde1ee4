#include "fogswitch/domain.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <unordered_set>

namespace fogswitch {

static void check_unique_names(const std::vector<Parameter>& params, const std::string& where) {
    std::unordered_set<std::string> seen;
    for (const auto& p : params)
        if (!seen.insert(p.name).second)
            throw fog_error(errc::non_positive_param,
                            "duplicate parameter name '" + p.name + "' in " + where);
}

void validate_api(const WebApi& api) {
    if (api.name.empty())
        throw fog_error(errc::non_positive_param, "API name empty");
    if (api.ops.empty())
        throw fog_error(errc::non_positive_param, "API '" + api.name + "' has no operations");
    std::unordered_set<std::string> seen;
    for (const auto& op : api.ops) {
        if (op.name.empty())
            throw fog_error(errc::non_positive_param, "operation name empty");
        if (!seen.insert(op.name).second)
            throw fog_error(errc::non_positive_param, "duplicate operation '" + op.name + "'");
        check_unique_names(op.inputs, op.name + " inputs");
        check_unique_names(op.outputs, op.name + " outputs");
    }
}

WebApi make_cluster_api() {
    Parameter point{"point", false, ParamTag::Double, "array", {{"coord", true, ParamTag::Double, "", {}}}};
    ApiOperation cluster{
        "cluster",
        {{"k", true, ParamTag::Int, "", {}},
         {"it", true, ParamTag::Int, "", {}},
         {"seed", true, ParamTag::Long, "", {}},
         {"points", false, ParamTag::Double, "array", {point}}},
        {{"centroids", false, ParamTag::Double, "array", {point}},
         {"assignments", false, ParamTag::Int, "array", {{"index", true, ParamTag::Int, "", {}}}},
         {"iterations_run", true, ParamTag::Int, "", {}},
         {"inertia", true, ParamTag::Double, "", {}}}};
    return WebApi{"kmeans-analytics", {cluster}, ApiStyle::Rest, ""};
}

const MachineProfile* FogInfrastructure::find(const std::string& id) const {
    for (const auto& m : edge_machines)
        if (m.id == id) return &m;
    for (const auto& m : remote_machines)
        if (m.id == id) return &m;
    return nullptr;
}

void validate_infrastructure(const FogInfrastructure& infra) {
    if (infra.edge_machines.empty() && infra.remote_machines.empty())
        throw fog_error(errc::non_positive_param, "infrastructure has no machines");
    std::unordered_set<std::string> ids;
    auto check = [&](const MachineProfile& m, Tier expected) {
        if (!ids.insert(m.id).second)
            throw fog_error(errc::non_positive_param, "duplicate machine id '" + m.id + "'");
        if (m.tier != expected)
            throw fog_error(errc::non_positive_param,
                            "machine '" + m.id + "' tier does not match its list");
        if (!(m.cpu_factor > 0))
            throw fog_error(errc::non_positive_param, "machine '" + m.id + "' cpu_factor <= 0");
        if (!(m.bandwidth_bytes_per_ms > 0))
            throw fog_error(errc::non_positive_param, "machine '" + m.id + "' bandwidth <= 0");
        if (m.rtt_ms < 0)
            throw fog_error(errc::non_positive_param, "machine '" + m.id + "' rtt < 0");
        if (expected == Tier::Edge && m.rtt_ms != 0.0)
            throw fog_error(errc::non_positive_param,
                            "edge machine '" + m.id + "' must have rtt 0");
    };
    for (const auto& m : infra.edge_machines) check(m, Tier::Edge);
    for (const auto& m : infra.remote_machines) check(m, Tier::Remote);
}

const ServiceInstance* find_instance(const std::vector<ServiceInstance>& instances,
                                     const std::string& id) {
    for (const auto& si : instances)
        if (si.id == id) return &si;
    return nullptr;
}

void validate_features(const FeatureVector& f) {
    if (f.k <= 0 || f.it <= 0 || f.n <= 0 || f.d <= 0)
        throw fog_error(errc::non_positive_param, "features must be strictly positive");
    if (f.k > f.n)
        throw fog_error(errc::non_positive_param, "k exceeds point count");
    if (f.d > 64)
        throw fog_error(errc::non_positive_param, "point dimension exceeds 64");
}

FeatureVector extract_features(int k, int it, const Dataset& points) {
    if (points.empty())
        throw fog_error(errc::empty_dataset, "request carries no points");
    std::size_t d = points.front().size();
    if (d == 0)
        throw fog_error(errc::empty_dataset, "zero-dimensional points");
    if (d > 64)
        throw fog_error(errc::non_positive_param, "point dimension exceeds 64");
    for (const auto& p : points)
        if (p.size() != d)
            throw fog_error(errc::ragged_dataset, "points of differing dimension");
    if (k <= 0 || it <= 0)
        throw fog_error(errc::non_positive_param, "k and it must be positive");
    if (std::size_t(k) > points.size())
        throw fog_error(errc::non_positive_param, "k exceeds point count");
    return FeatureVector{k, it, int(points.size()), int(d)};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

double parse_double_strict(const std::string& s) {
    double v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
        throw fog_error(errc::malformed_row, "not a number: '" + s + "'");
    return v;
}

long parse_long_strict(const std::string& s) {
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
        throw fog_error(errc::malformed_row, "not an integer: '" + s + "'");
    return v;
}

Dataset parse_dataset(const std::string& text) {
    if (text.empty())
        throw fog_error(errc::empty_dataset, "empty dataset text");
    Dataset out;
    std::size_t cols = 0;
    for (const auto& line : split(text, '\n')) {
        if (line.empty()) continue;  // trailing newline
        std::vector<double> row;
        for (const auto& cell : split(line, ','))
            row.push_back(parse_double_strict(cell));
        if (cols == 0)
            cols = row.size();
        else if (row.size() != cols)
            throw fog_error(errc::malformed_row, "row has " + std::to_string(row.size()) +
                                                     " cells, expected " + std::to_string(cols));
        out.push_back(std::move(row));
    }
    if (out.empty())
        throw fog_error(errc::empty_dataset, "no rows");
    return out;
}

std::string serialize_dataset(const Dataset& points) {
    std::string out;
    for (const auto& p : points) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (j) out += ',';
            out += format_double(p[j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace fogswitch
