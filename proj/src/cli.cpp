#include "fogswitch/cli.hpp"

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fogswitch/config.hpp"
#include "fogswitch/eval.hpp"
#include "fogswitch/httpsvc.hpp"
#include "fogswitch/planner.hpp"

namespace fogswitch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fog_error(errc::io_failure, "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw fog_error(errc::io_failure, "cannot write '" + path + "'");
    out << content;
    if (!out) throw fog_error(errc::io_failure, "short write to '" + path + "'");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw fog_error(errc::io_failure, "cannot create '" + dir + "': " + ec.message());
}

FogConfig config_or_default(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

int fail(const std::string& msg, int code) {
    std::cerr << "error: " << msg << "\n";
    return code;
}

std::string fmt_ms(double ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", ms);
    return buf;
}

volatile std::sig_atomic_t g_stop = 0;
void handle_stop(int) { g_stop = 1; }

void block_until_signal() {
    g_stop = 0;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

}  // namespace

int cmd_generate(const GenerateOptions& opts) {
    FogConfig cfg;
    try {
        cfg = load_config(opts.config_path);
    } catch (const fog_error& e) {
        return fail(e.what(), exit_usage);
    }
    int count = opts.count > 0 ? opts.count : cfg.workload_count;
    std::uint64_t seed = opts.seed >= 0 ? std::uint64_t(opts.seed) : cfg.seed;
    double sigma = opts.noise_sigma >= 0 ? opts.noise_sigma : cfg.noise_sigma;
    MonitoringMode mode =
        opts.mode == "live" ? MonitoringMode::Live : MonitoringMode::Analytic;
    if (opts.mode != "live" && opts.mode != "analytic")
        return fail("--mode must be analytic or live", exit_usage);

    try {
        std::vector<FeatureVector> workloads = sample_workloads(count, cfg.ranges, seed);
        std::vector<MonitoringRecord> records = generate_monitoring(
            workloads, cfg.instances, mode, cfg.rt_params, opts.noise_seed, sigma);
        ensure_dir(opts.out_dir);
        write_file((fs::path(opts.out_dir) / "workloads.csv").string(),
                   serialize_workloads(workloads));
        write_file((fs::path(opts.out_dir) / "monitoring.csv").string(),
                   serialize_monitoring(records));
        std::cerr << "wrote " << count << " workloads x " << cfg.instances.size()
                  << " instances to " << opts.out_dir << "\n";
        return exit_ok;
    } catch (const fog_error& e) {
        return fail(e.what(), exit_io);
    }
}

int cmd_train(const TrainOptions& opts) {
    FogConfig cfg;
    bool have_cfg = !opts.config_path.empty();
    if (have_cfg) {
        try {
            cfg = load_config(opts.config_path);
        } catch (const fog_error& e) {
            return fail(e.what(), exit_usage);
        }
    }
    RegressorKind kind;
    try {
        kind = kind_from_name(opts.kind);
    } catch (const fog_error&) {
        return fail("--kind must be one of knn, svr, dtree, nn (got '" + opts.kind + "')",
                    exit_usage);
    }

    std::vector<MonitoringRecord> records;
    try {
        records = parse_monitoring(read_file(opts.data_path));
    } catch (const fog_error& e) {
        return fail(e.what(), exit_io);
    }

    std::vector<ServiceInstance> instances;
    if (have_cfg) {
        instances = cfg.instances;
    } else {
        // without a config the instance set is whatever the data mentions
        WebApi api = make_cluster_api();
        for (const auto& [id, n] : count_records(records)) {
            (void)n;
            ServiceInstance si;
            si.id = id;
            si.api = api;
            instances.push_back(si);
        }
    }
    std::uint64_t seed =
        opts.seed >= 0 ? std::uint64_t(opts.seed) : (have_cfg ? cfg.seed : FogConfig{}.seed);

    try {
        std::map<std::string, double> wall;
        ModelMap models = train_all(records, instances, kind, seed, !opts.sequential, &wall);
        for (const auto& [id, ms] : wall)
            std::cerr << "trained " << kind_name(kind) << " model for " << id << " in "
                      << fmt_ms(ms) << " ms\n";
        save_model_dir(models, kind, seed, count_records(records), opts.out_dir);
        std::cerr << "wrote " << models.size() << " models + manifest to " << opts.out_dir
                  << "\n";
        return exit_ok;
    } catch (const fog_error& e) {
        return fail(e.what(), e.code() == errc::io_failure ? exit_io : exit_training);
    }
}

int cmd_serve_backend(const ServeBackendOptions& opts) {
    FogConfig cfg;
    try {
        cfg = config_or_default(opts.config_path);
    } catch (const fog_error& e) {
        return fail(e.what(), exit_usage);
    }
    const MachineProfile* profile = cfg.infrastructure.find(opts.profile);
    if (!profile)
        return fail("unknown machine profile '" + opts.profile + "'", exit_usage);
    BackendMode mode;
    if (opts.mode == "real") mode = BackendMode::Real;
    else if (opts.mode == "simulated-delay") mode = BackendMode::SimulatedDelay;
    else return fail("--mode must be real or simulated-delay", exit_usage);

    try {
        HttpService svc = serve_backend(opts.host, opts.port, *profile, mode, cfg.rt_params);
        std::cerr << "backend '" << profile->id << "' (" << tier_name(profile->tier)
                  << ", " << opts.mode << ") listening on " << opts.host << ":" << svc.port()
                  << "\n"
                  << std::flush;
        block_until_signal();
        svc.stop();
        std::cerr << "backend stopped\n";
        return exit_ok;
    } catch (const fog_error& e) {
        return fail(e.what(), e.code() == errc::bind_failure ? exit_bind : exit_io);
    }
}

int cmd_serve_proxy(const ServeProxyOptions& opts) {
    FogConfig cfg;
    try {
        cfg = config_or_default(opts.instances_path);
    } catch (const fog_error& e) {
        return fail(e.what(), exit_usage);
    }
    ProxyOptions popts;
    popts.timeout_ms = opts.timeout_ms > 0 ? opts.timeout_ms : cfg.timeout_ms;
    if (!opts.kind.empty()) {
        try {
            popts.expect_kind = kind_from_name(opts.kind);
        } catch (const fog_error&) {
            return fail("--kind must be one of knn, svr, dtree, nn", exit_usage);
        }
    }

    try {
        HttpService svc =
            self_backend_serve(opts.host, opts.port, opts.model_dir, cfg.instances, popts);
        std::cerr << "proxy over " << cfg.instances.size() << " instances listening on "
                  << opts.host << ":" << svc.port() << "\n"
                  << std::flush;
        block_until_signal();
        svc.stop();
        std::cerr << "proxy stopped\n";
        return exit_ok;
    } catch (const fog_error& e) {
        return fail(e.what(), e.code() == errc::bind_failure ? exit_bind : exit_io);
    }
}

namespace {

json comparison_row(const ExperimentResult& r) {
    json row;
    row["kind"] = r.oracle ? "oracle" : kind_name(r.kind);
    row["accuracy"] = r.metrics.overall_accuracy;
    row["precision"] = {{"edge", r.metrics.edge_precision},
                        {"remote", r.metrics.remote_precision}};
    row["recall"] = {{"edge", r.metrics.edge_recall}, {"remote", r.metrics.remote_recall}};
    row["rti"] = r.rti.average_edge_rti;
    return row;
}

void print_summary(const ExperimentResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%-8s accuracy=%.3f precision(edge/remote)=%.3f/%.3f "
                  "recall(edge/remote)=%.3f/%.3f avg_edge_rti=%.3f",
                  r.oracle ? "oracle" : kind_name(r.kind), r.metrics.overall_accuracy,
                  r.metrics.edge_precision, r.metrics.remote_precision, r.metrics.edge_recall,
                  r.metrics.remote_recall, r.rti.average_edge_rti);
    std::cout << buf << "\n";
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& opts) {
    FogConfig cfg;
    try {
        cfg = config_or_default(opts.config_path);
    } catch (const fog_error& e) {
        return fail(e.what(), exit_usage);
    }
    std::string kind = opts.kind.empty() ? cfg.kind : opts.kind;
    bool known = kind == "knn" || kind == "svr" || kind == "dtree" || kind == "nn" ||
                 kind == "all" || kind == "oracle";
    if (!known)
        return fail("--kind must be one of knn, svr, dtree, nn, all, oracle", exit_usage);

    ExperimentConfig base;
    base.instances = cfg.instances;
    base.workload_count = opts.count > 0 ? opts.count : cfg.workload_count;
    base.train_count = opts.train_count >= 0 ? opts.train_count : cfg.train_count;
    base.seed = opts.seed >= 0 ? std::uint64_t(opts.seed) : cfg.seed;
    base.noise_sigma = cfg.noise_sigma;
    base.rt_params = cfg.rt_params;
    base.ranges = cfg.ranges;
    base.parallel_training = !opts.sequential;
    if (base.train_count <= 0 || base.train_count >= base.workload_count)
        return fail("train count must lie strictly between 0 and the workload count",
                    exit_usage);

    auto run_one = [&](const std::string& kname) {
        ExperimentConfig ec = base;
        if (kname == "oracle") ec.oracle_models = true;
        else ec.kind = kind_from_name(kname);
        ExperimentResult res = run_experiment(ec);
        write_file((fs::path(opts.out_dir) / ("report_" + kname + ".json")).string(),
                   experiment_report_json(res));
        write_file((fs::path(opts.out_dir) / ("decisions_" + kname + ".csv")).string(),
                   res.decisions_csv);
        return res;
    };

    try {
        ensure_dir(opts.out_dir);
        if (kind == "all") {
            json table = json::array();
            for (const char* kname : {"knn", "svr", "dtree", "nn"}) {
                ExperimentResult res = run_one(kname);
                table.push_back(comparison_row(res));
                print_summary(res);
            }
            write_file((fs::path(opts.out_dir) / "comparison.json").string(),
                       table.dump(2) + "\n");
        } else {
            print_summary(run_one(kind));
        }
        return exit_ok;
    } catch (const fog_error& e) {
        return fail(e.what(), e.code() == errc::io_failure ? exit_io : exit_training);
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"fogswitch: response-time-modeling switching proxy for edge/remote analytics"};
    app.require_subcommand(1);

    GenerateOptions gen;
    CLI::App* g = app.add_subcommand("generate", "sample workloads and monitoring data");
    g->add_option("--config", gen.config_path, "TOML config file")->required();
    g->add_option("--count", gen.count, "number of workloads (default: config)");
    g->add_option("--seed", gen.seed, "workload sampling seed (default: config)");
    g->add_option("--noise-seed", gen.noise_seed, "noise stream seed (default 1)");
    g->add_option("--noise-sigma", gen.noise_sigma,
                  "lognormal noise sigma (default: config)");
    g->add_option("--mode", gen.mode, "analytic | live (default analytic)")
        ->check(CLI::IsMember({"analytic", "live"}));
    g->add_option("--out", gen.out_dir, "output directory (default .)");

    TrainOptions tr;
    CLI::App* t = app.add_subcommand("train", "fit per-instance response-time models");
    t->add_option("--kind", tr.kind, "regressor: knn | svr | dtree | nn")
        ->required()
        ->check(CLI::IsMember({"knn", "svr", "dtree", "nn"}));
    t->add_option("--data", tr.data_path, "monitoring CSV")->required();
    t->add_option("--out", tr.out_dir, "model directory to write")->required();
    t->add_option("--seed", tr.seed, "training seed (default: config or 7)");
    t->add_option("--config", tr.config_path, "TOML config file (fixes the instance set)");
    t->add_flag("--sequential", tr.sequential, "train instances one after another");

    CLI::App* s = app.add_subcommand("serve", "run a long-lived service");
    s->require_subcommand(1);

    ServeBackendOptions sb;
    CLI::App* b = s->add_subcommand("backend", "kmeans analytics instance");
    b->add_option("--profile", sb.profile, "machine id from the config")->required();
    b->add_option("--port", sb.port, "TCP port (0 = any free port)");
    b->add_option("--host", sb.host, "bind address (default 127.0.0.1)");
    b->add_option("--config", sb.config_path, "TOML config file");
    b->add_option("--mode", sb.mode, "real | simulated-delay (default real)")
        ->check(CLI::IsMember({"real", "simulated-delay"}));

    ServeProxyOptions sp;
    CLI::App* p = s->add_subcommand("proxy", "switching self-back-end");
    p->add_option("--models", sp.model_dir, "model directory from train")->required();
    p->add_option("--instances", sp.instances_path, "TOML config file naming the instances");
    p->add_option("--port", sp.port, "TCP port (0 = any free port)");
    p->add_option("--host", sp.host, "bind address (default 127.0.0.1)");
    p->add_option("--timeout-ms", sp.timeout_ms, "upstream timeout (default: config)");
    p->add_option("--kind", sp.kind, "require this model kind")
        ->check(CLI::IsMember({"knn", "svr", "dtree", "nn"}));

    EvaluateOptions ev;
    CLI::App* e = app.add_subcommand("evaluate", "run the switching experiment");
    e->add_option("--kind", ev.kind, "knn | svr | dtree | nn | all | oracle")
        ->check(CLI::IsMember({"knn", "svr", "dtree", "nn", "all", "oracle"}));
    e->add_option("--config", ev.config_path, "TOML config file");
    e->add_option("--seed", ev.seed, "experiment seed (default: config)");
    e->add_option("--count", ev.count, "workload count (default: config)");
    e->add_option("--train-count", ev.train_count, "training prefix size (default: config)");
    e->add_flag("--sequential", ev.sequential, "train instances one after another");
    e->add_option("--out", ev.out_dir, "report directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int rc = app.exit(err);
        return rc == 0 ? exit_ok : exit_usage;
    }

    if (g->parsed()) return cmd_generate(gen);
    if (t->parsed()) return cmd_train(tr);
    if (s->parsed()) {
        if (b->parsed()) return cmd_serve_backend(sb);
        if (p->parsed()) return cmd_serve_proxy(sp);
    }
    if (e->parsed()) return cmd_evaluate(ev);
    return exit_usage;  // unreachable: require_subcommand enforces one
}

}  // namespace fogswitch
