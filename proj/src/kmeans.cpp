#include "fogswitch/kmeans.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "fogswitch/rng.hpp"

namespace fogswitch {

static double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// nearest centroid per point, ties to the lowest index
static std::vector<int> assign_pass(const Dataset& points, const Dataset& centroids) {
    std::vector<int> assign(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        int best = 0;
        double best_d = sqdist(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            double d = sqdist(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = int(c);
            }
        }
        assign[i] = best;
    }
    return assign;
}

static double total_inertia(const Dataset& points, const Dataset& centroids,
                            const std::vector<int>& assign) {
    double s = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        s += sqdist(points[i], centroids[assign[i]]);
    return s;
}

ClusterResult kmeans_cluster(const ClusterRequest& req, std::vector<double>* inertia_trace) {
    const Dataset& pts = req.dataset;
    const int n = int(pts.size());
    if (req.k <= 0 || req.it <= 0)
        throw fog_error(errc::non_positive_param, "k and it must be positive");
    if (n == 0)
        throw fog_error(errc::empty_dataset, "no points to cluster");
    if (req.k > n)
        throw fog_error(errc::k_too_large,
                        "k=" + std::to_string(req.k) + " exceeds n=" + std::to_string(n));
    const std::size_t d = pts.front().size();
    for (const auto& p : pts) {
        if (p.size() != d)
            throw fog_error(errc::ragged_dataset, "points of differing dimension");
        for (double v : p)
            if (!std::isfinite(v))
                throw fog_error(errc::non_finite_point, "NaN/Inf coordinate");
    }

    // seeded draw of k distinct point indices (partial Fisher-Yates)
    rng64 rng(req.seed);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < req.k; ++i)
        std::swap(idx[i], idx[rng.uniform_int(i, n - 1)]);
    Dataset centroids(req.k);
    for (int c = 0; c < req.k; ++c) centroids[c] = pts[idx[c]];

    std::vector<int> assign = assign_pass(pts, centroids);
    int iterations_run = 0;
#ifndef NDEBUG
    double prev_inertia = std::numeric_limits<double>::infinity();
#endif

    for (int round = 1; round <= req.it; ++round) {
        // means of current members
        Dataset sums(req.k, std::vector<double>(d, 0.0));
        std::vector<int> counts(req.k, 0);
        for (int i = 0; i < n; ++i) {
            counts[assign[i]]++;
            for (std::size_t j = 0; j < d; ++j) sums[assign[i]][j] += pts[i][j];
        }
        for (int c = 0; c < req.k; ++c) {
            if (counts[c] == 0) {
                // reseed an emptied cluster to the point farthest from its
                // current centroid (ties to the lowest point index)
                int far = 0;
                double far_d = -1;
                for (int i = 0; i < n; ++i) {
                    double dist = sqdist(pts[i], centroids[c]);
                    if (dist > far_d) {
                        far_d = dist;
                        far = i;
                    }
                }
                centroids[c] = pts[far];
            } else {
                for (std::size_t j = 0; j < d; ++j) centroids[c][j] = sums[c][j] / counts[c];
            }
        }
        iterations_run = round;

        std::vector<int> next = assign_pass(pts, centroids);
#ifndef NDEBUG
        double cur_inertia = total_inertia(pts, centroids, next);
        assert(cur_inertia <= prev_inertia * (1 + 1e-12) + 1e-12);
        prev_inertia = cur_inertia;
#endif
        if (inertia_trace) inertia_trace->push_back(total_inertia(pts, centroids, next));
        bool settled = (next == assign);
        assign = std::move(next);
        if (settled) break;
    }

    ClusterResult res;
    res.centroids = std::move(centroids);
    res.assignments = std::move(assign);
    res.iterations_run = iterations_run;
    res.inertia = total_inertia(pts, res.centroids, res.assignments);
    return res;
}

}  // namespace fogswitch
