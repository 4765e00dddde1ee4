#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fogswitch/domain.hpp"

namespace fogswitch {

using Rows = std::vector<std::vector<double>>;

enum class RegressorKind { Knn, Svr, DecisionTree, NeuralNet };

const char* kind_name(RegressorKind k);                  // knn | svr | dtree | nn
RegressorKind kind_from_name(const std::string& name);   // NonPositiveParam on junk

// per-feature mean/stdev over the training rows; stdevs floored at 1e-9 so a
// constant feature maps to 0 instead of dividing by zero
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stdevs;

    static Standardizer fit(const Rows& X);
    std::vector<double> apply(const std::vector<double>& row) const;
    Rows apply_all(const Rows& X) const;
};

struct KnnPayload {
    int neighbors = 10;  // min(10, training rows)
    Rows X;              // standardized training rows
    std::vector<double> y;
};

struct SvrPayload {
    Rows support_x;                  // standardized support vectors
    std::vector<double> dual_coef;   // alpha - alpha*, target scaling folded in
    double bias = 0.0;
    double gamma = 0.0;              // 1 / (p + entry_variance)
    double C = 1.0;
    double epsilon = 0.1;
    double entry_variance = 0.0;     // V, kept for audit
    bool converged = true;           // false when the pass budget ran out
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
};

struct TreePayload {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct NnPayload {
    std::vector<int> layer_sizes;  // [p, ceil(sqrt(p)), 1]
    Rows weights;                  // one row-major (fan_in x fan_out) block per layer
    Rows biases;                   // one vector per layer
    double leaky_slope = 0.01;
};

struct TrainedModel {
    RegressorKind kind = RegressorKind::Knn;
    Standardizer standardizer;
    std::variant<KnnPayload, SvrPayload, TreePayload, NnPayload> payload;
};

// mean rt of the min(10, |X|) nearest training rows under Euclidean distance
// on standardized features
TrainedModel train_knn(const Rows& X, const std::vector<double>& y);

// eps-insensitive RBF support-vector regression solved by sequential minimal
// optimization (KKT tolerance 1e-3, C=1, eps=0.1, pass budget 10*|X| sweeps
// over the dual variables). targets are standardized for the solve and the
// scaling folded back into dual_coef/bias, so the stored payload predicts
// raw milliseconds.
TrainedModel train_svr(const Rows& X, const std::vector<double>& y);

// binary regression tree, variance-reduction splits over midpoint thresholds
// between consecutive distinct feature values, grown until leaves are pure
// (min impurity split 0) or singleton; candidate features = min(4, p)
TrainedModel train_dtree(const Rows& X, const std::vector<double>& y);

// [p, ceil(sqrt(p)), 1] network, LeakyReLU(0.01) hidden layer, linear output,
// fit on ln(rt) by full-batch Adam (step 0.01), 2000 epochs or until the
// epoch-over-epoch loss improvement drops below 1e-8; Glorot-uniform init
// from `seed`. ln targets are standardized for the fit and the affine map
// folded into the output layer, so the stored net maps features -> ln(rt).
// optional trace receives the loss at the start of every epoch.
TrainedModel train_nn(const Rows& X, const std::vector<double>& y, std::uint64_t seed,
                      std::vector<double>* loss_trace = nullptr);

TrainedModel train_model(RegressorKind kind, const Rows& X, const std::vector<double>& y,
                         std::uint64_t seed);

// standardize, evaluate, require a finite value, floor at 0.001 ms
double predict(const TrainedModel& model, const FeatureVector& f);
double predict_row(const TrainedModel& model, const std::vector<double>& raw_row);

// gradient-check surface: MSE loss and its analytic gradient at explicit
// parameters, on already-standardized inputs and training-space targets
namespace nn {
double loss(const NnPayload& p, const Rows& X, const std::vector<double>& t);
NnPayload gradient(const NnPayload& p, const Rows& X, const std::vector<double>& t);
}  // namespace nn

// binary model file, magic "FSM1" + version byte; layout in docs/model-format.md
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& bytes);

}  // namespace fogswitch
