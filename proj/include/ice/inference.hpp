#ifndef ICE_INFERENCE_HPP_
#define ICE_INFERENCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

#include "association.hpp"
#include "common.hpp"

namespace ice {

struct PredictionContext {
    std::vector<std::size_t> neighbor_indices;
    std::vector<std::size_t> selected_models;  // pool indices, duplicates preserved
    std::size_t M = 0;
    std::vector<double> partial_probs;
    double whole_prob = 0.0;
    double final_prob = 0.0;
    bool whole_fallback = false;  // M=0 with beta*N=0
    std::size_t unique_models = 0;
};

inline std::vector<std::size_t> find_neighbors(std::span<const double> x, const Matrix& train_X,
                                               std::size_t n) {
    if (n < 1) throw UsageError("neighbor count must be >= 1");
    if (x.size() != train_X.cols) throw UsageError("feature dimension mismatch");
    std::size_t q = train_X.rows;
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(q);
    for (std::size_t i = 0; i < q; ++i) dist[i] = squared_distance(x, train_X.row(i));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    if (n < q) order.resize(n);
    return order;
}

// Multiset of partial-model indices from the neighbors' decision rows; the
// whole-model column is excluded and handled through p^whole.
inline std::vector<std::size_t> collect_models(const Matrix& d,
                                               const std::vector<std::size_t>& neighbors) {
    std::vector<std::size_t> out;
    for (std::size_t k : neighbors) {
        if (k >= d.rows) throw UsageError("neighbor index out of range");
        for (std::size_t j = 0; j + 1 < d.cols; ++j)
            if (d(k, j) != 0.0) out.push_back(j);
    }
    return out;
}

inline double combine(const std::vector<double>& partial_probs, double whole_prob, std::size_t n,
                      double alpha, double beta, bool* fallback = nullptr) {
    double m = static_cast<double>(partial_probs.size());
    double denom = (alpha + 1.0) * m + beta * static_cast<double>(n);
    if (denom <= 0.0) {
        if (fallback) *fallback = true;
        return whole_prob;  // M=0 with beta=0: a prediction must always exist
    }
    double sum = 0.0;
    for (double p : partial_probs) sum += p;
    return (sum + (alpha * m + beta * static_cast<double>(n)) * whole_prob) / denom;
}

// Prediction over an already-normalized feature vector.
inline PredictionContext predict_normalized(std::span<const double> x, const IceModel& model) {
    PredictionContext ctx;
    ctx.neighbor_indices = find_neighbors(x, model.train_X, model.params.N);
    ctx.selected_models = collect_models(model.D, ctx.neighbor_indices);
    ctx.M = ctx.selected_models.size();
    ctx.unique_models =
        std::set<std::size_t>(ctx.selected_models.begin(), ctx.selected_models.end()).size();

    for (std::size_t j : ctx.selected_models)
        ctx.partial_probs.push_back(model.pool[j].predict_proba(x));
    ctx.whole_prob = model.pool.back().predict_proba(x);
    ctx.final_prob = combine(ctx.partial_probs, ctx.whole_prob, ctx.neighbor_indices.size(),
                             model.params.alpha, model.params.beta, &ctx.whole_fallback);
    return ctx;
}

inline PredictionContext predict_instance(std::span<const double> x_raw, const IceModel& model) {
    std::vector<double> x = apply_scaler(model.scaler, x_raw);
    return predict_normalized(x, model);
}

inline int hard_label(double prob) { return prob >= 0.5 ? 1 : 0; }

}  // namespace ice

#endif
