#include <doctest.h>

#include "fogswitch/domain.hpp"
#include "fogswitch/rng.hpp"

using namespace fogswitch;

namespace {

// code of the fog_error thrown by fn, or "" if nothing was thrown
template <typename Fn>
std::string thrown_code(Fn&& fn) {
    try {
        fn();
    } catch (const fog_error& e) {
        return e.code();
    }
    return "";
}

Dataset points(int n, int d, double fill = 1.0) {
    return Dataset(n, std::vector<double>(d, fill));
}

}  // namespace

TEST_CASE("cluster api validates and describes the one operation") {
    WebApi api = make_cluster_api();
    CHECK_NOTHROW(validate_api(api));
    REQUIRE(api.ops.size() == 1);
    CHECK(api.ops[0].name == "cluster");
    CHECK(api.style == ApiStyle::Rest);
    CHECK(api.ops[0].inputs.size() == 4);   // k, it, seed, points
    CHECK(api.ops[0].outputs.size() == 4);  // centroids, assignments, iterations_run, inertia
}

TEST_CASE("api validation rejects structural defects") {
    WebApi api = make_cluster_api();

    WebApi unnamed = api;
    unnamed.name.clear();
    CHECK(thrown_code([&] { validate_api(unnamed); }) == errc::non_positive_param);

    WebApi no_ops = api;
    no_ops.ops.clear();
    CHECK(thrown_code([&] { validate_api(no_ops); }) == errc::non_positive_param);

    WebApi dup_op = api;
    dup_op.ops.push_back(dup_op.ops[0]);
    CHECK(thrown_code([&] { validate_api(dup_op); }) == errc::non_positive_param);

    WebApi dup_param = api;
    dup_param.ops[0].inputs.push_back(dup_param.ops[0].inputs[0]);
    CHECK(thrown_code([&] { validate_api(dup_param); }) == errc::non_positive_param);
}

TEST_CASE("extract_features mirrors the request shape") {
    FeatureVector f = extract_features(3, 100, points(1000, 3));
    CHECK(f == FeatureVector{3, 100, 1000, 3});

    CHECK(extract_features(1, 1, points(1, 1)) == FeatureVector{1, 1, 1, 1});

    // values are irrelevant, only counts and the shared dimension
    Dataset a = points(10, 4, 0.0), b = points(10, 4, 123.456);
    CHECK(extract_features(2, 5, a) == extract_features(2, 5, b));
}

TEST_CASE("extract_features rejects malformed requests") {
    CHECK(thrown_code([] { extract_features(2, 5, {}); }) == errc::empty_dataset);

    Dataset ragged = {{1, 2, 3}, {1, 2, 3, 4}};
    CHECK(thrown_code([&] { extract_features(2, 5, ragged); }) == errc::ragged_dataset);

    CHECK(thrown_code([] { extract_features(0, 5, points(3, 2)); }) == errc::non_positive_param);
    CHECK(thrown_code([] { extract_features(2, 0, points(3, 2)); }) == errc::non_positive_param);
    CHECK(thrown_code([] { extract_features(4, 5, points(3, 2)); }) == errc::non_positive_param);
    CHECK(thrown_code([] { extract_features(2, 5, points(3, 65)); }) ==
          errc::non_positive_param);
}

TEST_CASE("feature validation enforces positivity, k <= n, and the d bound") {
    CHECK_NOTHROW(validate_features({2, 10, 100, 3}));
    CHECK(thrown_code([] { validate_features({0, 10, 100, 3}); }) == errc::non_positive_param);
    CHECK(thrown_code([] { validate_features({2, 0, 100, 3}); }) == errc::non_positive_param);
    CHECK(thrown_code([] { validate_features({2, 10, 0, 3}); }) == errc::non_positive_param);
    CHECK(thrown_code([] { validate_features({2, 10, 100, 0}); }) == errc::non_positive_param);
    CHECK(thrown_code([] { validate_features({101, 10, 100, 3}); }) == errc::non_positive_param);
    CHECK(thrown_code([] { validate_features({2, 10, 100, 65}); }) == errc::non_positive_param);
    CHECK_NOTHROW(validate_features({2, 10, 100, 64}));
}

TEST_CASE("feature row is ordered (k, it, n, d)") {
    FeatureVector f{3, 100, 1000, 7};
    CHECK(f.row() == std::vector<double>{3, 100, 1000, 7});
}

TEST_CASE("infrastructure validation") {
    MachineProfile edge{"e0", Tier::Edge, 0.5, 0.0, 1.25e3};
    MachineProfile remote{"r0", Tier::Remote, 4.0, 25.0, 1.25e3};
    FogInfrastructure infra{{edge}, {remote}};
    CHECK_NOTHROW(validate_infrastructure(infra));
    CHECK(infra.find("e0") != nullptr);
    CHECK(infra.find("r0")->tier == Tier::Remote);
    CHECK(infra.find("nope") == nullptr);

    CHECK(thrown_code([] { validate_infrastructure({}); }) == errc::non_positive_param);

    FogInfrastructure dup = infra;
    dup.remote_machines.push_back({"e0", Tier::Remote, 1.0, 1.0, 1.0});
    CHECK(thrown_code([&] { validate_infrastructure(dup); }) == errc::non_positive_param);

    FogInfrastructure wrong_list = infra;
    wrong_list.edge_machines[0].tier = Tier::Remote;
    CHECK(thrown_code([&] { validate_infrastructure(wrong_list); }) ==
          errc::non_positive_param);

    FogInfrastructure lagged_edge = infra;
    lagged_edge.edge_machines[0].rtt_ms = 3.0;  // edge links are latency-free by contract
    CHECK(thrown_code([&] { validate_infrastructure(lagged_edge); }) ==
          errc::non_positive_param);

    FogInfrastructure bad_cpu = infra;
    bad_cpu.remote_machines[0].cpu_factor = 0.0;
    CHECK(thrown_code([&] { validate_infrastructure(bad_cpu); }) == errc::non_positive_param);

    FogInfrastructure bad_bw = infra;
    bad_bw.remote_machines[0].bandwidth_bytes_per_ms = -1;
    CHECK(thrown_code([&] { validate_infrastructure(bad_bw); }) == errc::non_positive_param);
}

TEST_CASE("find_instance resolves ids") {
    ServiceInstance a, b;
    a.id = "alpha";
    b.id = "beta";
    std::vector<ServiceInstance> v{a, b};
    CHECK(find_instance(v, "beta") == &v[1]);
    CHECK(find_instance(v, "gamma") == nullptr);
}

TEST_CASE("dataset CSV parses the documented format") {
    Dataset d = parse_dataset("1.0,2.0\n3.0,4.0");
    REQUIRE(d.size() == 2);
    CHECK(d[0] == std::vector<double>{1.0, 2.0});
    CHECK(d[1] == std::vector<double>{3.0, 4.0});

    CHECK(thrown_code([] { parse_dataset(""); }) == errc::empty_dataset);
    CHECK(thrown_code([] { parse_dataset("\n\n"); }) == errc::empty_dataset);
    CHECK(thrown_code([] { parse_dataset("1,2\n3"); }) == errc::malformed_row);
    CHECK(thrown_code([] { parse_dataset("1,zebra"); }) == errc::malformed_row);
}

TEST_CASE("dataset CSV round-trips random data exactly") {
    rng64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        int n = int(rng.uniform_int(1, 100));
        int d = int(rng.uniform_int(1, 8));
        Dataset data(n, std::vector<double>(d));
        for (auto& row : data)
            for (auto& v : row) v = rng.uniform(-1e6, 1e6);
        Dataset again = parse_dataset(serialize_dataset(data));
        CHECK(again == data);
        // serialized form is canonical: serializing the re-parse changes nothing
        CHECK(serialize_dataset(again) == serialize_dataset(data));
    }
}

TEST_CASE("number formatting round-trips and stays minimal") {
    for (double v : {0.0, 1.0, -1.5, 0.1, 1e-9, 6e-6, 1.25e3, 12345.6789, 1e300}) {
        CHECK(parse_double_strict(format_double(v)) == v);
    }
    CHECK(format_double(2.0) == "2");  // shortest form, no trailing zeros

    CHECK(thrown_code([] { parse_double_strict("1.5x"); }) == errc::malformed_row);
    CHECK(thrown_code([] { parse_double_strict(""); }) == errc::malformed_row);
    CHECK(parse_long_strict("-42") == -42);
    CHECK(thrown_code([] { parse_long_strict("4.2"); }) == errc::malformed_row);
}

TEST_CASE("split keeps empty fields") {
    CHECK(split("a,b,c", ',') == std::vector<std::string>{"a", "b", "c"});
    CHECK(split(",x,", ',') == std::vector<std::string>{"", "x", ""});
    CHECK(split("", ',') == std::vector<std::string>{""});
}
