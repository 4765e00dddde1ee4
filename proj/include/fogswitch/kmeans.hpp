#pragma once

#include <cstdint>
#include <vector>

#include "fogswitch/domain.hpp"

namespace fogswitch {

struct ClusterRequest {
    int k = 1;
    int it = 1;
    Dataset dataset;
    std::uint64_t seed = 0;
};

struct ClusterResult {
    Dataset centroids;             // k points of dimension d
    std::vector<int> assignments;  // n indices in [0, k), each the nearest centroid
    int iterations_run = 0;
    double inertia = 0.0;          // within-cluster sum of squared distances
};

inline FeatureVector extract_features(const ClusterRequest& req) {
    return extract_features(req.k, req.it, req.dataset);
}

// Lloyd's algorithm. init = k distinct points via a seeded draw without
// replacement; at most `it` assign/update rounds with early stop once
// assignments settle; an emptied cluster is reseeded to the point farthest
// from its current centroid. deterministic in (dataset, k, it, seed).
// optional trace receives the inertia after every update round.
ClusterResult kmeans_cluster(const ClusterRequest& req,
                             std::vector<double>* inertia_trace = nullptr);

}  // namespace fogswitch
