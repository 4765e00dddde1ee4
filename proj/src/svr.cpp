#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

#include "fogswitch/predictors.hpp"

namespace fogswitch {

double eval_svr_payload(const SvrPayload& p, const std::vector<double>& x) {
    double s = p.bias;
    for (std::size_t i = 0; i < p.support_x.size(); ++i) {
        double d2 = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double diff = x[j] - p.support_x[i][j];
            d2 += diff * diff;
        }
        s += p.dual_coef[i] * std::exp(-p.gamma * d2);
    }
    return s;
}

namespace {

// SMO over the 2n-variable dual (alpha_i then alpha*_i), maximal-violating-pair
// selection with a second-order pick of the partner, as in standard SMO solvers.
// variable p: sign z_p = +1 for p < n, -1 otherwise; box 0 <= var <= C;
// equality constraint sum z_p var_p = 0.
struct SmoSolver {
    const Rows& X;
    const std::vector<double>& t;  // standardized targets
    double gamma, C, eps, tol;
    int n;
    std::vector<double> K;      // full kernel matrix, row-major
    std::vector<double> var;    // 2n dual variables
    std::vector<double> G;      // gradient of the dual objective
    bool converged = true;

    SmoSolver(const Rows& X, const std::vector<double>& t, double gamma, double C, double eps,
              double tol)
        : X(X), t(t), gamma(gamma), C(C), eps(eps), tol(tol), n(int(X.size())) {
        K.resize(std::size_t(n) * n);
        for (int i = 0; i < n; ++i) {
            K[std::size_t(i) * n + i] = 1.0;
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0;
                for (std::size_t f = 0; f < X[i].size(); ++f) {
                    double diff = X[i][f] - X[j][f];
                    d2 += diff * diff;
                }
                double v = std::exp(-gamma * d2);
                K[std::size_t(i) * n + j] = v;
                K[std::size_t(j) * n + i] = v;
            }
        }
        var.assign(std::size_t(2) * n, 0.0);
        G.resize(std::size_t(2) * n);
        for (int p = 0; p < 2 * n; ++p) G[p] = eps - sign(p) * t[row(p)];
    }

    int row(int p) const { return p < n ? p : p - n; }
    double sign(int p) const { return p < n ? 1.0 : -1.0; }
    double kern(int p, int q) const { return K[std::size_t(row(p)) * n + row(q)]; }

    bool in_up(int p) const { return sign(p) > 0 ? var[p] < C : var[p] > 0; }
    bool in_low(int p) const { return sign(p) > 0 ? var[p] > 0 : var[p] < C; }

    // one pair update; returns false once the KKT gap closes below tol
    bool step() {
        int i = -1;
        double m_val = -std::numeric_limits<double>::infinity();
        for (int p = 0; p < 2 * n; ++p)
            if (in_up(p) && -sign(p) * G[p] > m_val) {
                m_val = -sign(p) * G[p];
                i = p;
            }
        int j = -1;
        double M_val = std::numeric_limits<double>::infinity();
        double best_obj = 0;
        for (int p = 0; p < 2 * n; ++p) {
            if (!in_low(p)) continue;
            double v = -sign(p) * G[p];
            M_val = std::min(M_val, v);
            double b = m_val - v;
            if (b > 0) {
                double a = kern(i, i) + kern(p, p) - 2.0 * kern(i, p);
                if (a <= 0) a = 1e-12;
                double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = p;
                }
            }
        }
        if (i < 0 || j < 0 || m_val - M_val <= tol) return false;

        double zi = sign(i), zj = sign(j);
        double old_i = var[i], old_j = var[j];
        if (zi != zj) {
            double quad = kern(i, i) + kern(j, j) + 2.0 * kern(i, j);
            if (quad <= 0) quad = 1e-12;
            double delta = (-G[i] - G[j]) / quad;
            double diff = var[i] - var[j];
            var[i] += delta;
            var[j] += delta;
            if (diff > 0) {
                if (var[j] < 0) { var[j] = 0; var[i] = diff; }
            } else {
                if (var[i] < 0) { var[i] = 0; var[j] = -diff; }
            }
            if (diff > 0) {
                if (var[i] > C) { var[i] = C; var[j] = C - diff; }
            } else {
                if (var[j] > C) { var[j] = C; var[i] = C + diff; }
            }
        } else {
            double quad = kern(i, i) + kern(j, j) - 2.0 * kern(i, j);
            if (quad <= 0) quad = 1e-12;
            double delta = (G[i] - G[j]) / quad;
            double sum = var[i] + var[j];
            var[i] -= delta;
            var[j] += delta;
            if (sum > C) {
                if (var[i] > C) { var[i] = C; var[j] = sum - C; }
            } else {
                if (var[j] < 0) { var[j] = 0; var[i] = sum; }
            }
            if (sum > C) {
                if (var[j] > C) { var[j] = C; var[i] = sum - C; }
            } else {
                if (var[i] < 0) { var[i] = 0; var[j] = sum; }
            }
        }

        double di = zi * (var[i] - old_i), dj = zj * (var[j] - old_j);
        for (int p = 0; p < 2 * n; ++p)
            G[p] += sign(p) * (kern(p, i) * di + kern(p, j) * dj);
        return true;
    }

    void solve() {
        // pass budget: 10*|X| sweep-equivalents over the 2n dual variables
        long budget = 10L * n * 2L * n;
        long iter = 0;
        while (iter < budget && step()) ++iter;
        if (iter >= budget) {
            converged = false;
            std::cerr << "warning: SVR optimizer hit its pass budget before reaching "
                         "tolerance; keeping the best iterate\n";
        }
    }

    double bias() const {
        double sum = 0;
        int free_count = 0;
        for (int p = 0; p < 2 * n; ++p)
            if (var[p] > 0 && var[p] < C) {
                sum += -sign(p) * G[p];
                ++free_count;
            }
        if (free_count > 0) return sum / free_count;
        double m_val = -std::numeric_limits<double>::infinity();
        double M_val = std::numeric_limits<double>::infinity();
        for (int p = 0; p < 2 * n; ++p) {
            if (in_up(p)) m_val = std::max(m_val, -sign(p) * G[p]);
            if (in_low(p)) M_val = std::min(M_val, -sign(p) * G[p]);
        }
        return (m_val + M_val) / 2.0;
    }
};

}  // namespace

TrainedModel train_svr(const Rows& X, const std::vector<double>& y) {
    if (X.size() < 2 || X.size() != y.size())
        throw fog_error(errc::empty_training_set, "need at least 2 training rows");
    for (const auto& row : X)
        if (row.size() != X.front().size())
            throw fog_error(errc::ragged_dataset, "training rows of differing width");

    TrainedModel m;
    m.kind = RegressorKind::Svr;
    m.standardizer = Standardizer::fit(X);
    Rows Xs = m.standardizer.apply_all(X);
    std::size_t p = Xs.front().size();

    // gamma = 1/(p + V), V = variance pooled over every entry of the
    // standardized matrix
    double grand = 0;
    for (const auto& row : Xs)
        for (double v : row) grand += v;
    grand /= double(Xs.size() * p);
    double V = 0;
    for (const auto& row : Xs)
        for (double v : row) V += (v - grand) * (v - grand);
    V /= double(Xs.size() * p);
    double gamma = 1.0 / (double(p) + V);

    // solve on standardized targets, fold the scaling back below
    double y_mean = 0;
    for (double v : y) y_mean += v;
    y_mean /= double(y.size());
    double y_var = 0;
    for (double v : y) y_var += (v - y_mean) * (v - y_mean);
    double y_std = std::max(std::sqrt(y_var / double(y.size())), 1e-12);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = (y[i] - y_mean) / y_std;

    SmoSolver solver(Xs, t, gamma, 1.0, 0.1, 1e-3);
    solver.solve();
    double b = solver.bias();

    SvrPayload payload;
    payload.gamma = gamma;
    payload.C = 1.0;
    payload.epsilon = 0.1;
    payload.entry_variance = V;
    payload.converged = solver.converged;
    payload.bias = b * y_std + y_mean;
    for (int i = 0; i < solver.n; ++i) {
        double coef = solver.var[i] - solver.var[i + solver.n];
        if (coef != 0.0) {
            payload.support_x.push_back(Xs[i]);
            payload.dual_coef.push_back(coef * y_std);
        }
    }
    m.payload = std::move(payload);
    return m;
}

}  // namespace fogswitch
