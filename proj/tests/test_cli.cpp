#include <doctest.h>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "fogswitch/cli.hpp"
#include "fogswitch/httpsvc.hpp"
#include "fogswitch/planner.hpp"

using namespace fogswitch;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string drain(int fd) {
    std::string text;
    char buf[4096];
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof buf)) > 0) text.append(buf, std::size_t(n));
    return text;
}

// run the installed binary with the given arguments and wait for it to finish
RunResult run_tool(const std::vector<std::string>& args) {
    int out_pipe[2], err_pipe[2];
    REQUIRE(::pipe(out_pipe) == 0);
    REQUIRE(::pipe(err_pipe) == 0);

    pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        ::dup2(out_pipe[1], 1);
        ::dup2(err_pipe[1], 2);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        std::vector<char*> argv;
        std::string bin = FOGSWITCH_BIN;
        argv.push_back(bin.data());
        std::vector<std::string> copy = args;
        for (auto& a : copy) argv.push_back(a.data());
        argv.push_back(nullptr);
        ::execv(FOGSWITCH_BIN, argv.data());
        ::_exit(127);
    }
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);

    RunResult r;
    r.out = drain(out_pipe[0]);
    r.err = drain(err_pipe[0]);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    int status = 0;
    REQUIRE(::waitpid(pid, &status, 0) == pid);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct Server {
    pid_t pid = -1;
    int err_fd = -1;
    std::string log;
    int port = 0;

    Server() = default;
    Server(Server&& o) noexcept : pid(o.pid), err_fd(o.err_fd), log(std::move(o.log)),
                                  port(o.port) {
        o.pid = -1;
        o.err_fd = -1;
    }
    // kill anything a failing test left behind
    ~Server() {
        if (pid > 0) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
        }
        if (err_fd >= 0) ::close(err_fd);
    }
};

// spawn a long-lived `serve ...` process and wait for its listening banner
Server spawn_server(const std::vector<std::string>& args) {
    int err_pipe[2];
    REQUIRE(::pipe(err_pipe) == 0);
    pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) ::dup2(devnull, 1);
        ::dup2(err_pipe[1], 2);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        std::vector<char*> argv;
        std::string bin = FOGSWITCH_BIN;
        argv.push_back(bin.data());
        std::vector<std::string> copy = args;
        for (auto& a : copy) argv.push_back(a.data());
        argv.push_back(nullptr);
        ::execv(FOGSWITCH_BIN, argv.data());
        ::_exit(127);
    }
    ::close(err_pipe[1]);

    Server s;
    s.pid = pid;
    s.err_fd = err_pipe[0];

    // the banner may arrive in pieces; wait for the full line
    auto banner_end = [&] {
        std::size_t at = s.log.find("listening on");
        return at == std::string::npos ? std::string::npos : s.log.find('\n', at);
    };
    char buf[512];
    while (banner_end() == std::string::npos) {
        ssize_t n = ::read(s.err_fd, buf, sizeof buf);
        REQUIRE_MESSAGE(n > 0, "server exited before listening: ", s.log);
        s.log.append(buf, std::size_t(n));
    }
    std::size_t colon = s.log.find_last_of(':', banner_end());
    s.port = std::stoi(s.log.substr(colon + 1));
    REQUIRE(s.port > 0);
    return s;
}

// terminate the server and expect a clean exit
int stop_server(Server& s) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    ::kill(s.pid, SIGTERM);
    s.log += drain(s.err_fd);
    ::close(s.err_fd);
    s.err_fd = -1;
    int status = 0;
    REQUIRE(::waitpid(s.pid, &status, 0) == s.pid);
    s.pid = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << text;
}

// config with a fast edge and a slow remote; uris filled in by the caller
std::string config_text(int edge_port, int remote_port, int count, int train_count) {
    std::ostringstream s;
    s << "[workloads]\ncount = " << count << "\ntrain_count = " << train_count << "\n\n";
    s << "[experiment]\nseed = 5\nkind = \"knn\"\ntimeout_ms = 10000\n\n";
    s << "[machine.m_edge]\ntier = \"edge\"\ncpu_factor = 0.5\n\n";
    s << "[machine.m_remote]\ntier = \"remote\"\ncpu_factor = 4\nrtt_ms = 25\n\n";
    s << "[instance.e0]\nmachine = \"m_edge\"\nuri = \"http://127.0.0.1:" << edge_port
      << "\"\n\n";
    s << "[instance.r0]\nmachine = \"m_remote\"\nuri = \"http://127.0.0.1:" << remote_port
      << "\"\n";
    return s.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("help is on stdout and exits clean") {
    RunResult r = run_tool({"--help"});
    CHECK(r.exit_code == 0);
    for (const char* sub : {"generate", "train", "serve", "evaluate"})
        CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("bad invocations exit with the usage code") {
    CHECK(run_tool({}).exit_code == 2);  // a subcommand is required

    RunResult unknown = run_tool({"generate", "--bogus"});
    CHECK(unknown.exit_code == 2);

    RunResult kind = run_tool({"train", "--kind", "gini", "--data", "x", "--out", "y"});
    CHECK(kind.exit_code == 2);
    CHECK(kind.err.find("gini") != std::string::npos);

    RunResult cfg = run_tool({"generate", "--config", "/nonexistent/f.toml"});
    CHECK(cfg.exit_code == 2);
    CHECK(cfg.err.find("/nonexistent/f.toml") != std::string::npos);

    RunResult split = run_tool({"evaluate", "--count", "40", "--train-count", "40"});
    CHECK(split.exit_code == 2);
    CHECK(split.err.find("train count") != std::string::npos);
}

TEST_CASE("missing data files exit with the io code") {
    RunResult r = run_tool({"train", "--kind", "knn", "--data", "/nonexistent/mon.csv",
                            "--out", "/tmp/fogswitch_cli_nowhere"});
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("/nonexistent/mon.csv") != std::string::npos);
}

TEST_CASE("generate writes the same bytes on every run") {
    TempDir dir("fogswitch_cli_gen");
    fs::path cfg = dir.path / "fog.toml";
    write_file(cfg, config_text(18081, 18082, 30, 20));

    RunResult a = run_tool({"generate", "--config", cfg.string(), "--out",
                            (dir.path / "a").string()});
    REQUIRE_MESSAGE(a.exit_code == 0, a.err);
    RunResult b = run_tool({"generate", "--config", cfg.string(), "--out",
                            (dir.path / "b").string()});
    REQUIRE(b.exit_code == 0);

    std::string workloads = read_file(dir.path / "a" / "workloads.csv");
    CHECK(workloads == read_file(dir.path / "b" / "workloads.csv"));
    CHECK(read_file(dir.path / "a" / "monitoring.csv") ==
          read_file(dir.path / "b" / "monitoring.csv"));

    CHECK(workloads.rfind("k,it,n,d\n", 0) == 0);
    std::vector<FeatureVector> parsed = parse_workloads(workloads);
    CHECK(parsed.size() == 30);

    // sampling honours an explicit seed over the configured one
    RunResult c = run_tool({"generate", "--config", cfg.string(), "--seed", "9", "--out",
                            (dir.path / "c").string()});
    REQUIRE(c.exit_code == 0);
    CHECK(read_file(dir.path / "c" / "workloads.csv") != workloads);
}

TEST_CASE("train writes one model per instance plus an honest manifest") {
    TempDir dir("fogswitch_cli_train");
    fs::path cfg = dir.path / "fog.toml";
    write_file(cfg, config_text(18081, 18082, 30, 20));
    REQUIRE(run_tool({"generate", "--config", cfg.string(), "--out", dir.path.string()})
                .exit_code == 0);

    fs::path data = dir.path / "monitoring.csv";
    fs::path models = dir.path / "models";
    RunResult r = run_tool({"train", "--kind", "knn", "--data", data.string(), "--config",
                            cfg.string(), "--out", models.string()});
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(r.err.find("trained knn model for e0") != std::string::npos);
    CHECK(r.err.find("trained knn model for r0") != std::string::npos);

    CHECK(fs::exists(models / "e0.fsm"));
    CHECK(fs::exists(models / "r0.fsm"));

    auto counts = count_records(parse_monitoring(read_file(data)));
    auto manifest = nlohmann::json::parse(read_file(models / "manifest.json"));
    CHECK(manifest["kind"] == "knn");
    CHECK(manifest["instances"]["e0"]["records"] == counts.at("e0"));
    CHECK(manifest["instances"]["r0"]["records"] == counts.at("r0"));

    // the directory round-trips through the library loader
    ModelDir loaded = load_model_dir(models.string());
    CHECK(loaded.kind == RegressorKind::Knn);
    CHECK(loaded.models.size() == 2);
}

TEST_CASE("evaluating with the analytic formula as the model is always right") {
    TempDir dir("fogswitch_cli_oracle");
    RunResult r = run_tool({"evaluate", "--kind", "oracle", "--count", "40", "--train-count",
                            "25", "--out", dir.path.string()});
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(r.out.find("oracle") != std::string::npos);
    CHECK(r.out.find("accuracy=1.000") != std::string::npos);

    auto report = nlohmann::json::parse(read_file(dir.path / "report_oracle.json"));
    CHECK(report["kind"] == "oracle");
    CHECK(report["oracle"] == true);
    CHECK(report["metrics"]["overall_accuracy"] == 1.0);
    CHECK(report["metrics"]["confusion"]["false_edge"] == 0);
    CHECK(report["metrics"]["confusion"]["false_remote"] == 0);
}

TEST_CASE("evaluation reports agree with their own confusion matrix") {
    TempDir dir("fogswitch_cli_eval");
    RunResult r = run_tool({"evaluate", "--kind", "knn", "--count", "40", "--train-count",
                            "25", "--out", dir.path.string()});
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);

    auto report = nlohmann::json::parse(read_file(dir.path / "report_knn.json"));
    CHECK(report["kind"] == "knn");
    CHECK(report["train_count"] == 25);
    CHECK(report["test_count"] == 15);

    const auto& cm = report["metrics"]["confusion"];
    double tr = cm["true_remote"], fe = cm["false_edge"];
    double fr = cm["false_remote"], te = cm["true_edge"];
    CHECK(tr + fe + fr + te == 15.0);
    CHECK(report["metrics"]["overall_accuracy"] == (tr + te) / 15.0);

    // one decision row per test workload
    std::string csv = read_file(dir.path / "decisions_knn.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);  // header + 15 rows
    CHECK(csv.rfind("idx,k,it,n,d,correct,predicted,chosen_instance,cum_accuracy,rti\n", 0) ==
          0);
}

TEST_CASE("a served backend answers requests until it is told to stop") {
    Server backend = spawn_server({"serve", "backend", "--profile", "edge0", "--port", "0"});
    CHECK(backend.log.find("edge0") != std::string::npos);

    ClusterRequest req;
    req.k = 2;
    req.it = 4;
    req.seed = 3;
    req.dataset = {{0, 0}, {0, 1}, {9, 9}, {9, 8}, {5, 5}};
    httplib::Client cli("127.0.0.1", backend.port);
    auto res = cli.Post("/cluster", cluster_request_to_json(req), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == cluster_result_to_json(kmeans_cluster(req)));

    CHECK(stop_server(backend) == 0);
    CHECK(backend.log.find("backend stopped") != std::string::npos);
}

TEST_CASE("the full pipeline runs through the command line") {
    // two real analytics instances on free ports
    Server edge = spawn_server({"serve", "backend", "--profile", "edge0", "--port", "0"});
    Server remote = spawn_server({"serve", "backend", "--profile", "remote0", "--port", "0"});

    TempDir dir("fogswitch_cli_pipeline");
    fs::path cfg = dir.path / "fog.toml";
    write_file(cfg, config_text(edge.port, remote.port, 30, 20));

    REQUIRE(run_tool({"generate", "--config", cfg.string(), "--out", dir.path.string()})
                .exit_code == 0);
    fs::path models = dir.path / "models";
    REQUIRE(run_tool({"train", "--kind", "knn", "--data",
                      (dir.path / "monitoring.csv").string(), "--config", cfg.string(),
                      "--out", models.string()})
                .exit_code == 0);

    Server proxy = spawn_server({"serve", "proxy", "--models", models.string(), "--instances",
                                 cfg.string(), "--port", "0", "--kind", "knn"});
    CHECK(proxy.log.find("proxy over 2 instances") != std::string::npos);

    httplib::Client cli("127.0.0.1", proxy.port);
    cli.set_read_timeout(15, 0);
    auto health = cli.Get("/health");
    REQUIRE(health);
    auto hj = nlohmann::json::parse(health->body);
    CHECK(hj["instances"] == 2);
    CHECK(hj["kind"] == "knn");

    ClusterRequest req;
    req.k = 3;
    req.it = 6;
    req.seed = 12;
    for (int i = 0; i < 20; ++i)
        req.dataset.push_back({double(i % 7), double((i * 3) % 5), double(i)});
    std::string body = cluster_request_to_json(req);

    auto via_proxy = cli.Post("/cluster", body, "application/json");
    REQUIRE(via_proxy);
    REQUIRE(via_proxy->status == 200);
    std::string chosen = via_proxy->get_header_value("X-Fogswitch-Instance");
    REQUIRE((chosen == "e0" || chosen == "r0"));

    int chosen_port = chosen == "e0" ? edge.port : remote.port;
    httplib::Client direct("127.0.0.1", chosen_port);
    auto straight = direct.Post("/cluster", body, "application/json");
    REQUIRE(straight);
    CHECK(via_proxy->body == straight->body);

    CHECK(stop_server(proxy) == 0);
    CHECK(proxy.log.find("proxy stopped") != std::string::npos);
    CHECK(stop_server(edge) == 0);
    CHECK(stop_server(remote) == 0);
}

TEST_CASE("a proxy pointed at a missing model directory fails fast") {
    RunResult r = run_tool({"serve", "proxy", "--models", "/nonexistent/models", "--port",
                            "0"});
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("ModelLoadFailure") != std::string::npos);
}

TEST_CASE("a taken port is reported with the bind exit code") {
    int sock = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(sock >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::listen(sock, 1) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len) == 0);

    RunResult r = run_tool({"serve", "backend", "--profile", "edge0", "--port",
                            std::to_string(ntohs(addr.sin_port))});
    CHECK(r.exit_code == 5);
    CHECK(r.err.find("BindFailure") != std::string::npos);
    ::close(sock);
}
