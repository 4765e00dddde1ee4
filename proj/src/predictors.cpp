#include "fogswitch/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fogswitch/rng.hpp"

namespace fogswitch {

const char* kind_name(RegressorKind k) {
    switch (k) {
        case RegressorKind::Knn: return "knn";
        case RegressorKind::Svr: return "svr";
        case RegressorKind::DecisionTree: return "dtree";
        case RegressorKind::NeuralNet: return "nn";
    }
    return "?";
}

RegressorKind kind_from_name(const std::string& name) {
    if (name == "knn") return RegressorKind::Knn;
    if (name == "svr") return RegressorKind::Svr;
    if (name == "dtree") return RegressorKind::DecisionTree;
    if (name == "nn") return RegressorKind::NeuralNet;
    throw fog_error(errc::non_positive_param,
                    "unknown model kind '" + name + "' (expected knn|svr|dtree|nn)");
}

static void check_training_set(const Rows& X, const std::vector<double>& y, std::size_t min_rows) {
    if (X.size() < min_rows || X.empty())
        throw fog_error(errc::empty_training_set,
                        "need at least " + std::to_string(min_rows) + " training rows");
    if (X.size() != y.size())
        throw fog_error(errc::empty_training_set, "|X| != |y|");
    for (const auto& row : X)
        if (row.size() != X.front().size())
            throw fog_error(errc::ragged_dataset, "training rows of differing width");
}

// ---- standardizer -----------------------------------------------------------

Standardizer Standardizer::fit(const Rows& X) {
    std::size_t p = X.front().size();
    Standardizer s;
    s.means.assign(p, 0.0);
    s.stdevs.assign(p, 0.0);
    for (const auto& row : X)
        for (std::size_t j = 0; j < p; ++j) s.means[j] += row[j];
    for (std::size_t j = 0; j < p; ++j) s.means[j] /= double(X.size());
    for (const auto& row : X)
        for (std::size_t j = 0; j < p; ++j) {
            double diff = row[j] - s.means[j];
            s.stdevs[j] += diff * diff;
        }
    for (std::size_t j = 0; j < p; ++j)
        s.stdevs[j] = std::max(std::sqrt(s.stdevs[j] / double(X.size())), 1e-9);
    return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& row) const {
    if (row.size() != means.size())
        throw fog_error(errc::malformed_model, "feature width does not match the model");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - means[j]) / stdevs[j];
    return out;
}

Rows Standardizer::apply_all(const Rows& X) const {
    Rows out;
    out.reserve(X.size());
    for (const auto& row : X) out.push_back(apply(row));
    return out;
}

// ---- knn ---------------------------------------------------------------------

TrainedModel train_knn(const Rows& X, const std::vector<double>& y) {
    check_training_set(X, y, 1);
    TrainedModel m;
    m.kind = RegressorKind::Knn;
    m.standardizer = Standardizer::fit(X);
    KnnPayload payload;
    payload.neighbors = int(std::min<std::size_t>(10, X.size()));
    payload.X = m.standardizer.apply_all(X);
    payload.y = y;
    m.payload = std::move(payload);
    return m;
}

static double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// neighbors ranked by (distance, row index); targets accumulated in rank order
static double eval_knn(const KnnPayload& p, const std::vector<double>& x) {
    std::vector<std::pair<double, int>> dist(p.X.size());
    for (std::size_t i = 0; i < p.X.size(); ++i) dist[i] = {sqdist(x, p.X[i]), int(i)};
    std::partial_sort(dist.begin(), dist.begin() + p.neighbors, dist.end());
    double sum = 0;
    for (int j = 0; j < p.neighbors; ++j) sum += p.y[dist[j].second];
    return sum / p.neighbors;
}

// ---- decision tree -------------------------------------------------------------

namespace {

struct TreeBuilder {
    const Rows& X;
    const std::vector<double>& y;
    std::size_t max_feats;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& idx) {
        int node_id = int(nodes.size());
        nodes.push_back({});

        double y_min = y[idx[0]], y_max = y[idx[0]], y_sum = 0;
        for (int i : idx) {
            y_min = std::min(y_min, y[i]);
            y_max = std::max(y_max, y[i]);
            y_sum += y[i];
        }
        double mean = y_sum / double(idx.size());
        if (idx.size() == 1 || y_min == y_max) {
            nodes[node_id].leaf_value = mean;
            return node_id;
        }

        // best split = least summed child SSE over midpoints between
        // consecutive distinct values; ties keep the first (feature order,
        // then ascending threshold)
        int best_feat = -1;
        double best_thr = 0, best_score = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, int>> order(idx.size());
        for (std::size_t feat = 0; feat < max_feats; ++feat) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                order[i] = {X[idx[i]][feat], idx[i]};
            std::sort(order.begin(), order.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double sum_l = 0, sumsq_l = 0;
            double sum_all = 0, sumsq_all = 0;
            for (const auto& [v, i] : order) {
                sum_all += y[i];
                sumsq_all += y[i] * y[i];
            }
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                sum_l += y[order[pos].second];
                sumsq_l += y[order[pos].second] * y[order[pos].second];
                double v1 = order[pos].first, v2 = order[pos + 1].first;
                if (v1 == v2) continue;
                double thr = (v1 + v2) / 2.0;
                if (!(thr < v2)) continue;  // adjacent doubles: midpoint can collapse
                double n_l = double(pos + 1), n_r = double(order.size() - pos - 1);
                double sum_r = sum_all - sum_l, sumsq_r = sumsq_all - sumsq_l;
                double score = (sumsq_l - sum_l * sum_l / n_l) + (sumsq_r - sum_r * sum_r / n_r);
                if (score < best_score) {
                    best_score = score;
                    best_feat = int(feat);
                    best_thr = thr;
                }
            }
        }

        if (best_feat < 0) {  // identical rows with differing targets
            nodes[node_id].leaf_value = mean;
            return node_id;
        }

        std::vector<int> left, right;
        for (int i : idx)
            (X[i][best_feat] <= best_thr ? left : right).push_back(i);
        int l = build(left);
        int r = build(right);
        nodes[node_id].feature = best_feat;
        nodes[node_id].threshold = best_thr;
        nodes[node_id].left = l;
        nodes[node_id].right = r;
        return node_id;
    }
};

}  // namespace

TrainedModel train_dtree(const Rows& X, const std::vector<double>& y) {
    check_training_set(X, y, 1);
    TrainedModel m;
    m.kind = RegressorKind::DecisionTree;
    m.standardizer = Standardizer::fit(X);
    Rows Xs = m.standardizer.apply_all(X);
    TreeBuilder builder{Xs, y, std::min<std::size_t>(4, Xs.front().size()), {}};
    std::vector<int> idx(X.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
    builder.build(idx);
    m.payload = TreePayload{std::move(builder.nodes)};
    return m;
}

static double eval_tree(const TreePayload& p, const std::vector<double>& x) {
    int cur = 0;
    while (p.nodes[cur].feature >= 0) {
        const TreeNode& nd = p.nodes[cur];
        if (std::size_t(nd.feature) >= x.size())
            throw fog_error(errc::malformed_model, "tree feature index out of range");
        cur = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
        if (cur < 0 || std::size_t(cur) >= p.nodes.size())
            throw fog_error(errc::malformed_model, "tree child index out of range");
    }
    return p.nodes[cur].leaf_value;
}

// ---- neural net ----------------------------------------------------------------

namespace nn {

// forward pass; returns per-layer activations, activations.back() = outputs
static Rows forward(const NnPayload& p, const std::vector<double>& x) {
    Rows acts;
    acts.push_back(x);
    std::size_t layers = p.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        int fan_in = p.layer_sizes[l], fan_out = p.layer_sizes[l + 1];
        std::vector<double> z(fan_out);
        for (int j = 0; j < fan_out; ++j) {
            double s = p.biases[l][j];
            for (int i = 0; i < fan_in; ++i) s += acts.back()[i] * p.weights[l][i * fan_out + j];
            z[j] = s;
        }
        if (l + 1 < layers)
            for (double& v : z)
                if (v < 0) v *= p.leaky_slope;
        acts.push_back(std::move(z));
    }
    return acts;
}

double loss(const NnPayload& p, const Rows& X, const std::vector<double>& t) {
    double s = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double out = forward(p, X[i]).back()[0];
        double r = out - t[i];
        s += r * r;
    }
    return s / double(X.size());
}

NnPayload gradient(const NnPayload& p, const Rows& X, const std::vector<double>& t) {
    NnPayload g = p;
    for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
    std::size_t layers = p.weights.size();
    for (std::size_t i = 0; i < X.size(); ++i) {
        Rows acts = forward(p, X[i]);
        // dL/d(out) for the squared error term of this sample
        std::vector<double> delta = {2.0 * (acts.back()[0] - t[i]) / double(X.size())};
        for (std::size_t l = layers; l-- > 0;) {
            int fan_in = p.layer_sizes[l], fan_out = p.layer_sizes[l + 1];
            for (int j = 0; j < fan_out; ++j) {
                g.biases[l][j] += delta[j];
                for (int in = 0; in < fan_in; ++in)
                    g.weights[l][in * fan_out + j] += acts[l][in] * delta[j];
            }
            if (l == 0) break;
            std::vector<double> prev(fan_in, 0.0);
            for (int in = 0; in < fan_in; ++in) {
                double s = 0;
                for (int j = 0; j < fan_out; ++j) s += p.weights[l][in * fan_out + j] * delta[j];
                // acts[l] is the post-LeakyReLU activation of layer l; its
                // pre-activation shares the sign, so the slope test may use it
                prev[in] = s * (acts[l][in] < 0 ? p.leaky_slope : 1.0);
            }
            delta = std::move(prev);
        }
    }
    return g;
}

}  // namespace nn

TrainedModel train_nn(const Rows& X, const std::vector<double>& y, std::uint64_t seed,
                      std::vector<double>* loss_trace) {
    check_training_set(X, y, 1);
    TrainedModel m;
    m.kind = RegressorKind::NeuralNet;
    m.standardizer = Standardizer::fit(X);
    Rows Xs = m.standardizer.apply_all(X);
    int p = int(Xs.front().size());
    int hidden = int(std::ceil(std::sqrt(double(p))));

    NnPayload net;
    net.layer_sizes = {p, hidden, 1};
    rng64 rng(seed);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        int fan_in = net.layer_sizes[l], fan_out = net.layer_sizes[l + 1];
        double lim = std::sqrt(6.0 / double(fan_in + fan_out));
        std::vector<double> w(std::size_t(fan_in) * fan_out);
        for (double& v : w) v = rng.uniform(-lim, lim);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::vector<double>(fan_out, 0.0));
    }

    // fit standardized ln targets; the affine map is folded back afterwards
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0))
            throw fog_error(errc::non_positive_param, "rt targets must be positive");
        t[i] = std::log(y[i]);
    }
    double t_mean = 0;
    for (double v : t) t_mean += v;
    t_mean /= double(t.size());
    double t_var = 0;
    for (double v : t) t_var += (v - t_mean) * (v - t_mean);
    double t_std = std::max(std::sqrt(t_var / double(t.size())), 1e-9);
    for (double& v : t) v = (v - t_mean) / t_std;

    // full-batch Adam
    NnPayload mom = net, vel = net;
    for (auto& w : mom.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : mom.biases) std::fill(b.begin(), b.end(), 0.0);
    for (auto& w : vel.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : vel.biases) std::fill(b.begin(), b.end(), 0.0);
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double prev_loss = std::numeric_limits<double>::quiet_NaN();
    for (int epoch = 1; epoch <= 2000; ++epoch) {
        double cur = nn::loss(net, Xs, t);
        if (!std::isfinite(cur))
            throw fog_error(errc::non_finite_loss, "training diverged at epoch " +
                                                       std::to_string(epoch));
        if (loss_trace) loss_trace->push_back(cur);
        if (epoch > 1 && std::fabs(prev_loss - cur) < 1e-8) break;
        prev_loss = cur;

        NnPayload g = nn::gradient(net, Xs, t);
        double c1 = 1.0 - std::pow(b1, epoch), c2 = 1.0 - std::pow(b2, epoch);
        auto step = [&](std::vector<double>& w, std::vector<double>& mw, std::vector<double>& vw,
                        const std::vector<double>& gw) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                mw[i] = b1 * mw[i] + (1 - b1) * gw[i];
                vw[i] = b2 * vw[i] + (1 - b2) * gw[i] * gw[i];
                w[i] -= lr * (mw[i] / c1) / (std::sqrt(vw[i] / c2) + eps);
            }
        };
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            step(net.weights[l], mom.weights[l], vel.weights[l], g.weights[l]);
            step(net.biases[l], mom.biases[l], vel.biases[l], g.biases[l]);
        }
    }

    // fold target standardization into the linear output layer
    for (double& w : net.weights.back()) w *= t_std;
    net.biases.back()[0] = net.biases.back()[0] * t_std + t_mean;
    m.payload = std::move(net);
    return m;
}

static double eval_nn(const NnPayload& p, const std::vector<double>& x) {
    return std::exp(nn::forward(p, x).back()[0]);
}

// ---- shared prediction path -------------------------------------------------------

TrainedModel train_model(RegressorKind kind, const Rows& X, const std::vector<double>& y,
                         std::uint64_t seed) {
    switch (kind) {
        case RegressorKind::Knn: return train_knn(X, y);
        case RegressorKind::Svr: return train_svr(X, y);
        case RegressorKind::DecisionTree: return train_dtree(X, y);
        case RegressorKind::NeuralNet: return train_nn(X, y, seed);
    }
    throw fog_error(errc::non_positive_param, "bad kind");
}

double eval_svr_payload(const SvrPayload& p, const std::vector<double>& x);  // svr.cpp

double predict_row(const TrainedModel& model, const std::vector<double>& raw_row) {
    std::vector<double> x = model.standardizer.apply(raw_row);
    double v;
    switch (model.kind) {
        case RegressorKind::Knn: v = eval_knn(std::get<KnnPayload>(model.payload), x); break;
        case RegressorKind::Svr: v = eval_svr_payload(std::get<SvrPayload>(model.payload), x); break;
        case RegressorKind::DecisionTree:
            v = eval_tree(std::get<TreePayload>(model.payload), x);
            break;
        case RegressorKind::NeuralNet: v = eval_nn(std::get<NnPayload>(model.payload), x); break;
        default: throw fog_error(errc::malformed_model, "bad kind byte");
    }
    if (!std::isfinite(v))
        throw fog_error(errc::malformed_model, "non-finite prediction");
    return std::max(v, 0.001);
}

double predict(const TrainedModel& model, const FeatureVector& f) {
    return predict_row(model, f.row());
}

}  // namespace fogswitch
