#include "fogswitch/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fogswitch {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw fog_error(errc::config_error, msg); }

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// one parsed right-hand side; scalars keep their raw token so integers
// survive with full precision
struct TomlValue {
    enum class Kind { Str, Scalar, Bool, Arr };
    Kind kind = Kind::Scalar;
    std::string str;
    std::string raw;
    bool boolean = false;
    std::vector<std::string> arr;
    int line = 0;
};

using Section = std::map<std::string, TomlValue>;

struct TomlDoc {
    std::map<std::string, Section> sections;
};

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum((unsigned char)c) && c != '_' && c != '-' && c != '.') return false;
    return true;
}

// strips a trailing comment that starts outside quotes
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        else if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_value(const std::string& raw, int line_no) {
    TomlValue v;
    v.line = line_no;
    if (raw.empty()) bad("line " + std::to_string(line_no) + ": missing value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"' ||
            raw.find('"', 1) != raw.size() - 1)
            bad("line " + std::to_string(line_no) + ": bad string literal " + raw);
        v.kind = TomlValue::Kind::Str;
        v.str = raw.substr(1, raw.size() - 2);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::Bool;
        v.boolean = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') bad("line " + std::to_string(line_no) + ": unterminated array");
        v.kind = TomlValue::Kind::Arr;
        std::string inner = trim(raw.substr(1, raw.size() - 2));
        if (!inner.empty())
            for (const auto& tok : split(inner, ',')) {
                std::string t = trim(tok);
                if (t.empty()) bad("line " + std::to_string(line_no) + ": empty array element");
                v.arr.push_back(t);
            }
        return v;
    }
    v.kind = TomlValue::Kind::Scalar;
    v.raw = raw;
    return v;
}

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    std::string section;
    int line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') bad("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_name(section))
                bad("line " + std::to_string(line_no) + ": bad section name [" + section + "]");
            if (doc.sections.count(section))
                bad("line " + std::to_string(line_no) + ": duplicate section [" + section + "]");
            doc.sections[section];  // create
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            bad("line " + std::to_string(line_no) + ": expected key = value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        if (!valid_name(key) || key.find('.') != std::string::npos)
            bad("line " + std::to_string(line_no) + ": bad key '" + key + "'");
        if (section.empty())
            bad("line " + std::to_string(line_no) + ": key '" + key + "' outside any section");
        Section& sec = doc.sections[section];
        if (sec.count(key))
            bad("line " + std::to_string(line_no) + ": duplicate key '" + key + "' in [" +
                section + "]");
        sec[key] = parse_value(trim(s.substr(eq + 1)), line_no);
    }
    return doc;
}

double scalar_to_double(const TomlValue& v, const std::string& where) {
    if (v.kind != TomlValue::Kind::Scalar)
        bad(where + " must be a number");
    double out = 0;
    auto [p, ec] = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), out);
    if (ec != std::errc() || p != v.raw.data() + v.raw.size())
        bad(where + ": not a number: '" + v.raw + "'");
    return out;
}

long scalar_to_long(const TomlValue& v, const std::string& where) {
    if (v.kind != TomlValue::Kind::Scalar) bad(where + " must be an integer");
    long out = 0;
    auto [p, ec] = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), out);
    if (ec != std::errc() || p != v.raw.data() + v.raw.size())
        bad(where + ": not an integer: '" + v.raw + "'");
    return out;
}

std::uint64_t scalar_to_u64(const TomlValue& v, const std::string& where) {
    if (v.kind != TomlValue::Kind::Scalar) bad(where + " must be an unsigned integer");
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), out);
    if (ec != std::errc() || p != v.raw.data() + v.raw.size())
        bad(where + ": not an unsigned integer: '" + v.raw + "'");
    return out;
}

// tracks consumed keys so leftovers can be reported as unknown
struct SectionReader {
    const std::string name;
    const Section& sec;
    std::set<std::string> used;

    bool has(const std::string& key) {
        if (!sec.count(key)) return false;
        used.insert(key);
        return true;
    }
    const TomlValue& get(const std::string& key) { return sec.at(key); }

    double num(const std::string& key, double dflt) {
        return has(key) ? scalar_to_double(get(key), where(key)) : dflt;
    }
    long integer(const std::string& key, long dflt) {
        return has(key) ? scalar_to_long(get(key), where(key)) : dflt;
    }
    std::uint64_t u64(const std::string& key, std::uint64_t dflt) {
        return has(key) ? scalar_to_u64(get(key), where(key)) : dflt;
    }
    std::string str(const std::string& key, const std::string& dflt) {
        if (!has(key)) return dflt;
        const TomlValue& v = get(key);
        if (v.kind != TomlValue::Kind::Str) bad(where(key) + " must be a quoted string");
        return v.str;
    }
    std::string require_str(const std::string& key) {
        if (!sec.count(key)) bad("[" + name + "] is missing required key '" + key + "'");
        return str(key, "");
    }
    double require_num(const std::string& key) {
        if (!sec.count(key)) bad("[" + name + "] is missing required key '" + key + "'");
        return num(key, 0);
    }
    std::vector<long> int_array(const std::string& key) {
        if (!has(key)) return {};
        const TomlValue& v = get(key);
        if (v.kind != TomlValue::Kind::Arr) bad(where(key) + " must be an array");
        std::vector<long> out;
        for (const auto& tok : v.arr) {
            long x = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || p != tok.data() + tok.size())
                bad(where(key) + ": array element '" + tok + "' is not an integer");
            out.push_back(x);
        }
        return out;
    }
    void finish() {
        for (const auto& [key, value] : sec) {
            (void)value;
            if (!used.count(key)) bad("unknown key '" + key + "' in [" + name + "]");
        }
    }
    std::string where(const std::string& key) const { return "[" + name + "] " + key; }
};

std::pair<int, int> int_range(SectionReader& r, const std::string& stem,
                              std::pair<int, int> dflt) {
    int lo = int(r.integer(stem + "_min", dflt.first));
    int hi = int(r.integer(stem + "_max", dflt.second));
    if (lo <= 0 || hi < lo)
        bad("[" + r.name + "] " + stem + "_min/" + stem + "_max out of order");
    return {lo, hi};
}

}  // namespace

FogConfig default_config() {
    FogConfig cfg;
    cfg.ranges = default_workload_ranges();

    MachineProfile edge;
    edge.id = "edge0";
    edge.tier = Tier::Edge;
    edge.cpu_factor = 0.5;
    edge.rtt_ms = 0.0;
    edge.bandwidth_bytes_per_ms = 1.25e3;

    MachineProfile remote;
    remote.id = "remote0";
    remote.tier = Tier::Remote;
    remote.cpu_factor = 4.0;
    remote.rtt_ms = 25.0;
    remote.bandwidth_bytes_per_ms = 1.25e3;

    cfg.infrastructure.edge_machines = {edge};
    cfg.infrastructure.remote_machines = {remote};

    WebApi api = make_cluster_api();
    ServiceInstance e;
    e.id = "edge0";
    e.api = api;
    e.uri = "http://127.0.0.1:18081";
    e.machine = edge;
    ServiceInstance r;
    r.id = "remote0";
    r.api = api;
    r.uri = "http://127.0.0.1:18082";
    r.machine = remote;
    cfg.instances = {e, r};
    return cfg;
}

FogConfig parse_config(const std::string& text) {
    TomlDoc doc = parse_toml(text);
    FogConfig cfg;
    cfg.ranges = default_workload_ranges();
    cfg.infrastructure = {};
    cfg.instances = {};

    std::set<std::string> seen;
    auto section = [&](const std::string& name) -> const Section* {
        auto it = doc.sections.find(name);
        if (it == doc.sections.end()) return nullptr;
        seen.insert(name);
        return &it->second;
    };

    if (const Section* s = section("rt_model")) {
        SectionReader r{"rt_model", *s, {}};
        cfg.rt_params.alpha_ms = r.num("alpha_ms", cfg.rt_params.alpha_ms);
        cfg.rt_params.beta_ms = r.num("beta_ms", cfg.rt_params.beta_ms);
        cfg.rt_params.payload_overhead_bytes =
            r.integer("payload_overhead_bytes", cfg.rt_params.payload_overhead_bytes);
        cfg.noise_sigma = r.num("noise_sigma", cfg.noise_sigma);
        if (cfg.rt_params.alpha_ms <= 0 || cfg.rt_params.beta_ms < 0 ||
            cfg.rt_params.payload_overhead_bytes < 0 || cfg.noise_sigma < 0)
            bad("[rt_model] values out of range");
        r.finish();
    }

    if (const Section* s = section("workloads")) {
        SectionReader r{"workloads", *s, {}};
        cfg.workload_count = int(r.integer("count", cfg.workload_count));
        cfg.train_count = int(r.integer("train_count", cfg.train_count));
        if (cfg.workload_count <= 0) bad("[workloads] count must be positive");
        if (cfg.train_count < 0 || cfg.train_count >= cfg.workload_count)
            bad("[workloads] train_count must lie in [0, count)");
        std::vector<long> edges = r.int_array("n_band_edges");
        if (!edges.empty()) {
            if (edges.size() < 2) bad("[workloads] n_band_edges needs at least two edges");
            cfg.ranges.n_bands.clear();
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
                if (edges[i] < 1 || edges[i + 1] <= edges[i])
                    bad("[workloads] n_band_edges must be ascending and >= 1");
                cfg.ranges.n_bands.push_back({int(edges[i]), int(edges[i + 1] - 1)});
            }
        }
        cfg.ranges.d_range = int_range(r, "d", cfg.ranges.d_range);
        cfg.ranges.k_range = int_range(r, "k", cfg.ranges.k_range);
        cfg.ranges.it_range = int_range(r, "it", cfg.ranges.it_range);
        if (cfg.ranges.d_range.second > 64) bad("[workloads] d_max must be <= 64");
        r.finish();
    }

    if (const Section* s = section("experiment")) {
        SectionReader r{"experiment", *s, {}};
        cfg.seed = r.u64("seed", cfg.seed);
        cfg.kind = r.str("kind", cfg.kind);
        cfg.timeout_ms = int(r.integer("timeout_ms", cfg.timeout_ms));
        if (cfg.kind != "knn" && cfg.kind != "svr" && cfg.kind != "dtree" && cfg.kind != "nn")
            bad("[experiment] kind must be one of knn, svr, dtree, nn");
        if (cfg.timeout_ms <= 0) bad("[experiment] timeout_ms must be positive");
        r.finish();
    }

    std::map<std::string, MachineProfile> machines;
    std::map<std::string, std::pair<std::string, std::string>> instance_entries;  // id -> (machine, uri)
    for (const auto& [name, sec] : doc.sections) {
        if (name.rfind("machine.", 0) == 0) {
            seen.insert(name);
            std::string id = name.substr(8);
            if (id.empty() || id.find('.') != std::string::npos)
                bad("bad machine id in [" + name + "]");
            SectionReader r{name, sec, {}};
            MachineProfile m;
            m.id = id;
            std::string tier = r.require_str("tier");
            if (tier == "edge") m.tier = Tier::Edge;
            else if (tier == "remote") m.tier = Tier::Remote;
            else bad("[" + name + "] tier must be \"edge\" or \"remote\"");
            m.cpu_factor = r.require_num("cpu_factor");
            m.rtt_ms = r.num("rtt_ms", 0.0);
            m.bandwidth_bytes_per_ms = r.num("bandwidth_bytes_per_ms", 1.25e3);
            r.finish();
            machines[id] = m;
            if (m.tier == Tier::Edge) cfg.infrastructure.edge_machines.push_back(m);
            else cfg.infrastructure.remote_machines.push_back(m);
        } else if (name.rfind("instance.", 0) == 0) {
            seen.insert(name);
            std::string id = name.substr(9);
            if (id.empty() || id.find('.') != std::string::npos)
                bad("bad instance id in [" + name + "]");
            SectionReader r{name, sec, {}};
            std::string machine = r.require_str("machine");
            std::string uri = r.require_str("uri");
            r.finish();
            instance_entries[id] = {machine, uri};
        }
    }
    for (const auto& [name, sec] : doc.sections) {
        (void)sec;
        if (!seen.count(name)) bad("unknown section [" + name + "]");
    }

    if (machines.empty()) bad("no [machine.<id>] sections configured");
    if (instance_entries.empty()) bad("no [instance.<id>] sections configured");

    WebApi api = make_cluster_api();
    for (const auto& [id, entry] : instance_entries) {
        auto it = machines.find(entry.first);
        if (it == machines.end())
            bad("[instance." + id + "] references unknown machine '" + entry.first + "'");
        ServiceInstance si;
        si.id = id;
        si.api = api;
        si.uri = entry.second;
        si.machine = it->second;
        cfg.instances.push_back(si);
    }

    validate_infrastructure(cfg.infrastructure);
    return cfg;
}

FogConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fog_error(errc::config_error, "cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const FogConfig& cfg) {
    std::ostringstream out;
    out << "[rt_model]\n";
    out << "alpha_ms = " << format_double(cfg.rt_params.alpha_ms) << "\n";
    out << "beta_ms = " << format_double(cfg.rt_params.beta_ms) << "\n";
    out << "payload_overhead_bytes = " << cfg.rt_params.payload_overhead_bytes << "\n";
    out << "noise_sigma = " << format_double(cfg.noise_sigma) << "\n";

    out << "\n[workloads]\n";
    out << "count = " << cfg.workload_count << "\n";
    out << "train_count = " << cfg.train_count << "\n";
    out << "n_band_edges = [";
    for (std::size_t i = 0; i < cfg.ranges.n_bands.size(); ++i)
        out << cfg.ranges.n_bands[i].first << ", ";
    if (!cfg.ranges.n_bands.empty())
        out << cfg.ranges.n_bands.back().second + 1;
    out << "]\n";
    out << "d_min = " << cfg.ranges.d_range.first << "\n";
    out << "d_max = " << cfg.ranges.d_range.second << "\n";
    out << "k_min = " << cfg.ranges.k_range.first << "\n";
    out << "k_max = " << cfg.ranges.k_range.second << "\n";
    out << "it_min = " << cfg.ranges.it_range.first << "\n";
    out << "it_max = " << cfg.ranges.it_range.second << "\n";

    out << "\n[experiment]\n";
    out << "seed = " << cfg.seed << "\n";
    out << "kind = \"" << cfg.kind << "\"\n";
    out << "timeout_ms = " << cfg.timeout_ms << "\n";

    auto emit_machine = [&](const MachineProfile& m) {
        out << "\n[machine." << m.id << "]\n";
        out << "tier = \"" << tier_name(m.tier) << "\"\n";
        out << "cpu_factor = " << format_double(m.cpu_factor) << "\n";
        out << "rtt_ms = " << format_double(m.rtt_ms) << "\n";
        out << "bandwidth_bytes_per_ms = " << format_double(m.bandwidth_bytes_per_ms) << "\n";
    };
    for (const auto& m : cfg.infrastructure.edge_machines) emit_machine(m);
    for (const auto& m : cfg.infrastructure.remote_machines) emit_machine(m);

    for (const auto& si : cfg.instances) {
        out << "\n[instance." << si.id << "]\n";
        out << "machine = \"" << si.machine.id << "\"\n";
        out << "uri = \"" << si.uri << "\"\n";
    }
    return out.str();
}

}  // namespace fogswitch
