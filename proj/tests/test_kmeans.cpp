#include <doctest.h>

#include <cmath>
#include <limits>

#include "fogswitch/kmeans.hpp"
#include "fogswitch/rng.hpp"

using namespace fogswitch;

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// inertia recomputed from scratch for a given labeling
double inertia_of(const Dataset& points, const Dataset& centroids,
                  const std::vector<int>& assign) {
    double s = 0;
    for (std::size_t i = 0; i < points.size(); ++i) s += sqdist(points[i], centroids[assign[i]]);
    return s;
}

void check_result_invariants(const ClusterRequest& req, const ClusterResult& res) {
    REQUIRE(int(res.centroids.size()) == req.k);
    REQUIRE(res.assignments.size() == req.dataset.size());
    CHECK(res.inertia >= 0.0);
    CHECK(res.iterations_run <= req.it);
    for (std::size_t i = 0; i < req.dataset.size(); ++i) {
        int a = res.assignments[i];
        REQUIRE(a >= 0);
        REQUIRE(a < req.k);
        double mine = sqdist(req.dataset[i], res.centroids[a]);
        for (int c = 0; c < req.k; ++c)
            CHECK(mine <= sqdist(req.dataset[i], res.centroids[c]) + 1e-12);
    }
    CHECK(res.inertia == doctest::Approx(inertia_of(req.dataset, res.centroids,
                                                    res.assignments)).epsilon(1e-12));
}

Dataset random_points(int n, int d, std::uint64_t seed) {
    rng64 rng(seed);
    Dataset out(n, std::vector<double>(d));
    for (auto& row : out)
        for (auto& v : row) v = rng.uniform(-10, 10);
    return out;
}

}  // namespace

TEST_CASE("k=1 yields the coordinate-wise mean") {
    ClusterRequest req{1, 50, {{1, 2}, {3, 4}, {5, 12}}, 7};
    ClusterResult res = kmeans_cluster(req);
    REQUIRE(res.centroids.size() == 1);
    CHECK(res.centroids[0][0] == doctest::Approx(3.0));
    CHECK(res.centroids[0][1] == doctest::Approx(6.0));
    CHECK(res.assignments == std::vector<int>{0, 0, 0});
    check_result_invariants(req, res);
}

TEST_CASE("k=n with distinct points puts every point in its own cluster") {
    ClusterRequest req{4, 10, {{0, 0}, {5, 0}, {0, 5}, {5, 5}}, 3};
    ClusterResult res = kmeans_cluster(req);
    CHECK(res.inertia == 0.0);
    // all four points must be actual centroids
    for (const auto& p : req.dataset) {
        bool found = false;
        for (const auto& c : res.centroids) found = found || c == p;
        CHECK(found);
    }
    check_result_invariants(req, res);
}

TEST_CASE("two well-separated triangles: matches the brute-force optimum") {
    Dataset pts = {{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}};

    // exhaustive scan over every 2-partition for the minimum-inertia split
    double best = std::numeric_limits<double>::infinity();
    Dataset best_centroids;
    for (int mask = 1; mask < 63; ++mask) {  // non-empty proper subsets of 6 points
        Dataset groups[2] = {{}, {}};
        for (int i = 0; i < 6; ++i) groups[(mask >> i) & 1].push_back(pts[i]);
        Dataset cents;
        double total = 0;
        for (const auto& g : groups) {
            std::vector<double> mean(2, 0.0);
            for (const auto& p : g)
                for (int j = 0; j < 2; ++j) mean[j] += p[j] / double(g.size());
            for (const auto& p : g) total += sqdist(p, mean);
            cents.push_back(mean);
        }
        if (total < best) {
            best = total;
            best_centroids = cents;
        }
    }

    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 99ULL}) {
        ClusterRequest req{2, 100, pts, seed};
        ClusterResult res = kmeans_cluster(req);
        check_result_invariants(req, res);
        CHECK(res.inertia == doctest::Approx(best).epsilon(1e-12));
        // centroids are {(1/3,1/3),(31/3,31/3)} up to cluster order
        auto matches = [&](const std::vector<double>& c, double x) {
            return std::abs(c[0] - x) < 1e-9 && std::abs(c[1] - x) < 1e-9;
        };
        CHECK((matches(res.centroids[0], 1.0 / 3) || matches(res.centroids[0], 31.0 / 3)));
        CHECK((matches(res.centroids[1], 1.0 / 3) || matches(res.centroids[1], 31.0 / 3)));
        CHECK(res.centroids[0] != res.centroids[1]);
        CHECK(res.iterations_run < 100);  // early stop well before the budget
    }
}

TEST_CASE("request validation errors") {
    Dataset ok = {{0, 0}, {1, 1}};
    CHECK_THROWS_WITH_AS(kmeans_cluster({3, 10, ok, 0}), doctest::Contains("KTooLarge"),
                         fog_error);
    CHECK_THROWS_WITH_AS(kmeans_cluster({0, 10, ok, 0}), doctest::Contains("NonPositiveParam"),
                         fog_error);
    CHECK_THROWS_WITH_AS(kmeans_cluster({1, 0, ok, 0}), doctest::Contains("NonPositiveParam"),
                         fog_error);
    CHECK_THROWS_WITH_AS(kmeans_cluster({1, 10, {}, 0}), doctest::Contains("EmptyDataset"),
                         fog_error);
    CHECK_THROWS_WITH_AS(kmeans_cluster({1, 10, {{0, 0}, {1}}, 0}),
                         doctest::Contains("RaggedDataset"), fog_error);

    Dataset nan_pts = {{0, 0}, {std::nan(""), 1}};
    CHECK_THROWS_WITH_AS(kmeans_cluster({1, 10, nan_pts, 0}),
                         doctest::Contains("NonFinitePoint"), fog_error);
    Dataset inf_pts = {{0, 0}, {std::numeric_limits<double>::infinity(), 1}};
    CHECK_THROWS_WITH_AS(kmeans_cluster({1, 10, inf_pts, 0}),
                         doctest::Contains("NonFinitePoint"), fog_error);
}

TEST_CASE("identical request and seed give identical results") {
    ClusterRequest req{3, 40, random_points(60, 3, 11), 42};
    ClusterResult a = kmeans_cluster(req);
    ClusterResult b = kmeans_cluster(req);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignments == b.assignments);
    CHECK(a.iterations_run == b.iterations_run);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("inertia trace is non-increasing round over round") {
    ClusterRequest req{4, 50, random_points(200, 2, 5), 17};
    std::vector<double> trace;
    ClusterResult res = kmeans_cluster(req, &trace);
    check_result_invariants(req, res);
    REQUIRE(!trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    CHECK(res.inertia == doctest::Approx(trace.back()).epsilon(1e-12));
}

TEST_CASE("duplicate points with k=2 survive empty-cluster repair") {
    Dataset dupes(5, std::vector<double>{2.0, 2.0});
    ClusterRequest req{2, 20, dupes, 9};
    ClusterResult res = kmeans_cluster(req);
    CHECK(res.inertia == 0.0);
    check_result_invariants(req, res);
}

TEST_CASE("random datasets keep invariants across seeds") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        ClusterRequest req{5, 30, random_points(80, 4, 100 + seed), seed};
        std::vector<double> trace;
        ClusterResult res = kmeans_cluster(req, &trace);
        check_result_invariants(req, res);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
}
