#include "fogswitch/httpsvc.hpp"

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fogswitch/planner.hpp"
#include "fogswitch/rng.hpp"

namespace fogswitch {

using nlohmann::json;

// ---- wire schema ---------------------------------------------------------------

std::string cluster_request_to_json(const ClusterRequest& req) {
    json j;
    j["k"] = req.k;
    j["it"] = req.it;
    j["seed"] = req.seed;
    j["points"] = req.dataset;
    return j.dump();
}

ClusterRequest cluster_request_from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw fog_error(errc::malformed_row, std::string("bad request JSON: ") + e.what());
    }
    try {
        ClusterRequest req;
        req.k = j.at("k").get<int>();
        req.it = j.at("it").get<int>();
        req.seed = j.at("seed").get<std::uint64_t>();
        req.dataset = j.at("points").get<Dataset>();
        return req;
    } catch (const json::exception& e) {
        throw fog_error(errc::malformed_row, std::string("bad request fields: ") + e.what());
    }
}

std::string cluster_result_to_json(const ClusterResult& res) {
    json j;
    j["centroids"] = res.centroids;
    j["assignments"] = res.assignments;
    j["iterations_run"] = res.iterations_run;
    j["inertia"] = res.inertia;
    return j.dump();
}

ClusterResult cluster_result_from_json(const std::string& body) {
    try {
        json j = json::parse(body);
        ClusterResult res;
        res.centroids = j.at("centroids").get<Dataset>();
        res.assignments = j.at("assignments").get<std::vector<int>>();
        res.iterations_run = j.at("iterations_run").get<int>();
        res.inertia = j.at("inertia").get<double>();
        return res;
    } catch (const json::exception& e) {
        throw fog_error(errc::malformed_row, std::string("bad result JSON: ") + e.what());
    }
}

ParsedUri parse_uri(const std::string& uri) {
    const std::string scheme = "http://";
    if (uri.rfind(scheme, 0) != 0)
        throw fog_error(errc::config_error, "uri must start with http:// : '" + uri + "'");
    std::string rest = uri.substr(scheme.size());
    std::size_t slash = rest.find('/');
    ParsedUri out;
    out.base_path = slash == std::string::npos ? "" : rest.substr(slash);
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::size_t colon = hostport.rfind(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        try {
            out.port = int(parse_long_strict(hostport.substr(colon + 1)));
        } catch (const fog_error&) {
            throw fog_error(errc::config_error, "bad host/port in uri '" + uri + "'");
        }
    }
    if (out.host.empty() || out.port <= 0 || out.port > 65535)
        throw fog_error(errc::config_error, "bad host/port in uri '" + uri + "'");
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    return out;
}

// ---- service handle ---------------------------------------------------------------

struct HttpService::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    ~Impl() { shutdown(); }
    void shutdown() {
        if (server.is_running()) server.stop();
        if (thread.joinable()) thread.join();
    }
};

HttpService::HttpService() = default;
HttpService::HttpService(HttpService&&) noexcept = default;
HttpService& HttpService::operator=(HttpService&&) noexcept = default;
HttpService::~HttpService() = default;

int HttpService::port() const { return impl_ ? impl_->port : 0; }

void HttpService::stop() {
    if (impl_) impl_->shutdown();
}

HttpService make_service(std::unique_ptr<HttpService::Impl> impl) {
    HttpService svc;
    svc.impl_ = std::move(impl);
    return svc;
}

static void start_listening(HttpService::Impl& impl, const std::string& host, int port) {
    if (port == 0) {
        impl.port = impl.server.bind_to_any_port(host);
        if (impl.port <= 0)
            throw fog_error(errc::bind_failure, "cannot bind a port on " + host);
    } else {
        if (!impl.server.bind_to_port(host, port))
            throw fog_error(errc::bind_failure,
                            "cannot bind " + host + ":" + std::to_string(port));
        impl.port = port;
    }
    impl.thread = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
}

static void respond_error(httplib::Response& res, int status, const std::string& code) {
    json j;
    j["error"] = code;
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

// ---- analytics backend ---------------------------------------------------------------

HttpService serve_backend(const std::string& host, int port, const MachineProfile& profile,
                          BackendMode mode, const RtModelParams& params) {
    auto impl = std::make_unique<HttpService::Impl>();
    MachineProfile prof = profile;
    RtModelParams rt_params = params;

    impl->server.Post("/cluster", [prof, rt_params, mode](const httplib::Request& req,
                                                          httplib::Response& res) {
        auto start = std::chrono::steady_clock::now();
        try {
            ClusterRequest creq = cluster_request_from_json(req.body);
            ClusterResult result = kmeans_cluster(creq);  // validates first: its codes win
            if (mode == BackendMode::SimulatedDelay) {
                double target = analytic_rt(extract_features(creq), prof, rt_params);
                double elapsed = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
                if (target > elapsed)
                    std::this_thread::sleep_for(
                        std::chrono::duration<double, std::milli>(target - elapsed));
            }
            res.set_content(cluster_result_to_json(result), "application/json");
        } catch (const fog_error& e) {
            respond_error(res, 400, e.code());
        } catch (const std::exception&) {
            respond_error(res, 500, "Internal");
        }
    });

    start_listening(*impl, host, port);
    return make_service(std::move(impl));
}

// ---- forwarding ---------------------------------------------------------------

ForwardResult forward_raw(const std::string& body, const ServiceInstance& instance,
                          int timeout_ms) {
    ParsedUri uri = parse_uri(instance.uri);
    httplib::Client cli(uri.host, uri.port);
    cli.set_connection_timeout(0, timeout_ms * 1000);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    cli.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

    auto res = cli.Post(uri.base_path + "/cluster", body, "application/json");
    if (!res) {
        switch (res.error()) {
            case httplib::Error::Connection:
            case httplib::Error::ConnectionTimeout:
                throw fog_error(errc::connection_refused,
                                "instance '" + instance.id + "' unreachable at " + instance.uri);
            case httplib::Error::Read:
            case httplib::Error::Write:
                throw fog_error(errc::timeout,
                                "instance '" + instance.id + "' timed out after " +
                                    std::to_string(timeout_ms) + " ms");
            default:
                throw fog_error(errc::connection_refused,
                                "instance '" + instance.id + "' request failed: " +
                                    httplib::to_string(res.error()));
        }
    }
    if (res->status != 200)
        throw upstream_error(instance.id, res->status, res->body);
    return ForwardResult{res->status, res->body};
}

ClusterResult forward(const ClusterRequest& req, const ServiceInstance& instance,
                      int timeout_ms) {
    return cluster_result_from_json(
        forward_raw(cluster_request_to_json(req), instance, timeout_ms).body);
}

double measure_live_rt(const ServiceInstance& instance, const FeatureVector& f,
                       std::uint64_t seed, int timeout_ms) {
    ClusterRequest req;
    req.k = f.k;
    req.it = f.it;
    req.seed = seed;
    req.dataset.assign(f.n, std::vector<double>(f.d));
    rng64 rng(seed);
    for (auto& row : req.dataset)
        for (auto& v : row) v = rng.uniform();
    std::string body = cluster_request_to_json(req);

    auto start = std::chrono::steady_clock::now();
    try {
        forward_raw(body, instance, timeout_ms);
    } catch (const fog_error& e) {
        throw fog_error(errc::instance_unreachable, e.what());
    }
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// ---- switching proxy ---------------------------------------------------------------

namespace {

struct DecisionRing {
    std::mutex mu;
    std::deque<json> items;  // oldest first, capped at 1024

    void push(json j) {
        std::lock_guard lock(mu);
        items.push_back(std::move(j));
        if (items.size() > 1024) items.pop_front();
    }
    json snapshot() {
        std::lock_guard lock(mu);
        return json(items);
    }
};

json decision_to_json(const SwitchingDecision& d) {
    json j;
    j["chosen_instance"] = d.chosen_instance_id;
    j["predicted_rts"] = d.predicted_rts;
    j["kind"] = kind_name(d.kind);
    j["features"] = {{"k", d.features.k}, {"it", d.features.it}, {"n", d.features.n},
                     {"d", d.features.d}};
    j["plan_latency_ms"] = d.plan_latency_ms;
    return j;
}

}  // namespace

HttpService self_backend_serve(const std::string& host, int port, const std::string& model_dir,
                               const std::vector<ServiceInstance>& instances,
                               const ProxyOptions& opts) {
    ModelDir loaded = load_model_dir(model_dir);  // fail fast
    if (opts.expect_kind && *opts.expect_kind != loaded.kind)
        throw fog_error(errc::model_load_failure,
                        std::string("model directory holds ") + kind_name(loaded.kind) +
                            " models, expected " + kind_name(*opts.expect_kind));
    for (const auto& [id, model] : loaded.models) {
        (void)model;
        if (!find_instance(instances, id))
            throw fog_error(errc::model_load_failure,
                            "model '" + id + "' has no configured instance");
    }
    for (const auto& si : instances)
        if (!loaded.models.count(si.id))
            throw fog_error(errc::model_load_failure,
                            "instance '" + si.id + "' has no model in " + model_dir);

    auto impl = std::make_unique<HttpService::Impl>();
    auto models = std::make_shared<ModelMap>(std::move(loaded.models));
    auto insts = std::make_shared<std::vector<ServiceInstance>>(instances);
    auto ring = std::make_shared<DecisionRing>();
    RegressorKind kind = loaded.kind;
    int timeout_ms = opts.timeout_ms;

    impl->server.Post("/cluster", [models, insts, ring, timeout_ms](const httplib::Request& req,
                                                                    httplib::Response& res) {
        SwitchingDecision decision;
        try {
            ClusterRequest creq = cluster_request_from_json(req.body);
            FeatureVector f = extract_features(creq);
            decision = plan(f, *models, *insts);
            ring->push(decision_to_json(decision));
        } catch (const fog_error& e) {
            respond_error(res, 400, e.code());
            return;
        } catch (const std::exception&) {
            respond_error(res, 500, "Internal");
            return;
        }

        json predicted = decision.predicted_rts;
        res.set_header("X-Fogswitch-Instance", decision.chosen_instance_id);
        res.set_header("X-Fogswitch-Predicted-Ms", predicted.dump());
        try {
            const ServiceInstance* si = find_instance(*insts, decision.chosen_instance_id);
            ForwardResult fwd = forward_raw(req.body, *si, timeout_ms);
            res.status = fwd.status;
            res.set_content(fwd.body, "application/json");
        } catch (const upstream_error& e) {
            // surface the upstream response unchanged
            res.status = e.status;
            res.set_content(e.body, "application/json");
        } catch (const fog_error& e) {
            json j;
            j["error"] = e.code();
            j["instance"] = decision.chosen_instance_id;
            res.status = e.code() == errc::timeout ? 504 : 502;
            res.set_content(j.dump(), "application/json");
        }
    });

    impl->server.Get("/decisions", [ring](const httplib::Request&, httplib::Response& res) {
        res.set_content(ring->snapshot().dump(), "application/json");
    });

    std::size_t instance_count = insts->size();
    impl->server.Get("/health", [instance_count, kind](const httplib::Request&,
                                                       httplib::Response& res) {
        json j;
        j["instances"] = instance_count;
        j["kind"] = kind_name(kind);
        res.set_content(j.dump(), "application/json");
    });

    start_listening(*impl, host, port);
    return make_service(std::move(impl));
}

}  // namespace fogswitch
