#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fogswitch/fogsim.hpp"
#include "fogswitch/kmeans.hpp"
#include "fogswitch/predictors.hpp"

namespace fogswitch {

// ---- wire schema (POST /cluster) ----------------------------------------------

std::string cluster_request_to_json(const ClusterRequest& req);
ClusterRequest cluster_request_from_json(const std::string& body);
std::string cluster_result_to_json(const ClusterResult& res);
ClusterResult cluster_result_from_json(const std::string& body);

struct ParsedUri {
    std::string host;
    int port = 80;
    std::string base_path;  // without trailing slash
};
ParsedUri parse_uri(const std::string& uri);

// ---- running services -----------------------------------------------------------

// a bound-and-listening HTTP service; stops and joins on destruction
class HttpService {
  public:
    HttpService();
    HttpService(HttpService&&) noexcept;
    HttpService& operator=(HttpService&&) noexcept;
    ~HttpService();

    int port() const;
    void stop();

    struct Impl;

  private:
    friend HttpService make_service(std::unique_ptr<Impl>);
    std::unique_ptr<Impl> impl_;
};

enum class BackendMode { Real, SimulatedDelay };

// the analytics instance itself. in SimulatedDelay mode the handler sleeps
// analytic_rt(features, profile, params) minus the time actually spent, so
// one host can impersonate machines with different speed/latency profiles.
// pass port 0 to bind any free port.
HttpService serve_backend(const std::string& host, int port, const MachineProfile& profile,
                          BackendMode mode, const RtModelParams& params = {});

struct ForwardResult {
    int status = 0;
    std::string body;  // upstream payload, byte-for-byte
};

// single POST /cluster against the instance; Timeout / ConnectionRefused /
// UpstreamError all carry the instance id
ForwardResult forward_raw(const std::string& body, const ServiceInstance& instance,
                          int timeout_ms);
ClusterResult forward(const ClusterRequest& req, const ServiceInstance& instance, int timeout_ms);

struct ProxyOptions {
    int timeout_ms = 30000;
    std::optional<RegressorKind> expect_kind;  // verified against the manifest
};

// the switching proxy: exposes the same POST /cluster, plans per request,
// forwards to the chosen instance, and reports the decision in
// X-Fogswitch-Instance / X-Fogswitch-Predicted-Ms headers. also serves
// GET /decisions (last 1024 decisions) and GET /health.
HttpService self_backend_serve(const std::string& host, int port, const std::string& model_dir,
                               const std::vector<ServiceInstance>& instances,
                               const ProxyOptions& opts = {});

}  // namespace fogswitch
