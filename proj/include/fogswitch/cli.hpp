#pragma once

#include <cstdint>
#include <string>

namespace fogswitch {

// exit-code contract, kept script-friendly
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;  // bad flags or bad config
inline constexpr int exit_io = 3;
inline constexpr int exit_training = 4;
inline constexpr int exit_bind = 5;

struct GenerateOptions {
    std::string config_path;  // required
    std::string out_dir = ".";
    int count = -1;                    // -1 = take from config
    long long seed = -1;               // -1 = take from config
    std::uint64_t noise_seed = 1;
    double noise_sigma = -1;           // -1 = take from config
    std::string mode = "analytic";     // analytic | live
};

struct TrainOptions {
    std::string kind;       // knn | svr | dtree | nn
    std::string data_path;  // monitoring CSV
    std::string out_dir;
    long long seed = -1;       // -1 = take from config (or the built-in default)
    std::string config_path;   // optional; enforces the configured instance set
    bool sequential = false;
};

struct ServeBackendOptions {
    std::string profile;  // machine id from the config
    int port = 0;
    std::string host = "127.0.0.1";
    std::string config_path;       // optional; defaults provide edge0/remote0
    std::string mode = "real";     // real | simulated-delay
};

struct ServeProxyOptions {
    std::string model_dir;
    std::string instances_path;  // optional config file naming the instances
    int port = 0;
    std::string host = "127.0.0.1";
    int timeout_ms = -1;  // -1 = take from config
    std::string kind;     // optional; verified against the model manifest
};

struct EvaluateOptions {
    std::string kind;  // knn | svr | dtree | nn | all | oracle ("" = config kind)
    std::string config_path;  // optional
    std::string out_dir = ".";
    long long seed = -1;
    int count = -1;
    int train_count = -1;
    bool sequential = false;
};

// command bodies, callable without going through flag parsing; each returns a
// process exit code and reports errors on standard error
int cmd_generate(const GenerateOptions& opts);
int cmd_train(const TrainOptions& opts);
int cmd_serve_backend(const ServeBackendOptions& opts);  // blocks until signaled
int cmd_serve_proxy(const ServeProxyOptions& opts);      // blocks until signaled
int cmd_evaluate(const EvaluateOptions& opts);

// full command-line entry point (argv[0] = program name)
int run_cli(int argc, const char* const* argv);

}  // namespace fogswitch
