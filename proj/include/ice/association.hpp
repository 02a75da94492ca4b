#ifndef ICE_ASSOCIATION_HPP_
#define ICE_ASSOCIATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "common.hpp"
#include "data.hpp"
#include "graphcluster.hpp"
#include "learners.hpp"

namespace ice {

struct IceParams {
    std::size_t L = 100;
    double restart_p = 0.3;
    double z = 0.0;  // 0 -> Q/3
    double w = 0.4;
    double s = 0.5;
    std::size_t N = 5;
    double alpha = 1.0;
    double beta = 1.0;
    int cv_folds = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (L < 2) throw UsageError("L must be >= 2");
        if (!(restart_p > 0.0 && restart_p <= 1.0)) throw UsageError("restart_p must be in (0,1]");
        if (w < 0.0 || s < 0.0) throw UsageError("w and s must be >= 0");
        if (N < 1) throw UsageError("N must be >= 1");
        if (alpha < 0.0 || beta < 0.0) throw UsageError("alpha and beta must be >= 0");
        if (cv_folds < 2) throw UsageError("cv_folds must be >= 2");
    }
};

// Records which training rows produced each member prediction of P; test-only
// instrumentation for the leakage audit.
struct PredictionAudit {
    // per cluster: fold assignment over the cluster's member list, and the
    // global training-index set of each fold model
    std::vector<std::vector<int>> member_fold;
    std::vector<std::vector<std::vector<std::size_t>>> fold_train_sets;
};

struct DecisionArtifacts {
    Matrix P;  // predicted class-1 probabilities, Q x L
    Matrix E;  // raw errors |P - Y|, Q x L
    Matrix D;  // binary decision table, Q x L
};

namespace detail {

inline Matrix submatrix(const Matrix& X, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), X.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < X.cols; ++j) out(i, j) = X(rows[i], j);
    return out;
}

template <class T>
inline std::vector<T> subset(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

}  // namespace detail

// P[i][j]: remote instances get the pool model's direct prediction; members
// get an inner stratified-CV prediction so no instance is scored by a model
// that saw it in training.
inline Matrix build_prediction_matrix(const Dataset& ds, const ClusterSet& clusters,
                                      const Learner& base, int cv_folds, std::uint64_t seed,
                                      const std::vector<TrainedModel>* pool = nullptr,
                                      PredictionAudit* audit = nullptr) {
    std::size_t q = ds.Q();
    std::size_t l = clusters.L;
    Matrix p(q, l);
    if (audit) {
        audit->member_fold.assign(l, {});
        audit->fold_train_sets.assign(l, {});
    }

    for (std::size_t j = 0; j < l; ++j) {
        const std::vector<std::size_t>& members = clusters.clusters[j];
        std::vector<bool> is_member(q, false);
        for (std::size_t i : members) is_member[i] = true;

        Matrix mx = detail::submatrix(ds.X, members);
        std::vector<int> my = detail::subset(ds.Y, members);

        // remote case: direct prediction by the cluster model
        TrainedModel full = pool ? (*pool)[j] : fit_or_constant(base, mx, my);
        for (std::size_t i = 0; i < q; ++i)
            if (!is_member[i]) p(i, j) = full.predict_proba(ds.X.row(i));

        bool has0 = false, has1 = false;
        for (int yv : my) (yv != 0 ? has1 : has0) = true;
        if (!has0 || !has1 || members.size() < 2) {
            // single-class cluster: CV prediction is the constant prior
            TrainedModel c = fit_constant(my);
            for (std::size_t i : members) p(i, j) = c.prior;
            continue;
        }

        int folds = std::min<int>(cv_folds, static_cast<int>(members.size()));
        FoldAssignment fa = stratified_folds(my, folds, mix_seed(seed, j));
        if (audit) {
            audit->member_fold[j] = fa.fold_of;
            audit->fold_train_sets[j].assign(static_cast<std::size_t>(fa.k), {});
        }
        for (int f = 0; f < fa.k; ++f) {
            std::vector<std::size_t> train_local, test_local;
            for (std::size_t m = 0; m < members.size(); ++m)
                (fa.fold_of[m] == f ? test_local : train_local).push_back(m);
            if (test_local.empty()) continue;
            Matrix tx = detail::submatrix(mx, train_local);
            std::vector<int> ty = detail::subset(my, train_local);
            TrainedModel fm = fit_or_constant(base, tx, ty);
            if (audit)
                audit->fold_train_sets[j][static_cast<std::size_t>(f)] =
                    detail::subset(members, train_local);
            for (std::size_t m : test_local) p(members[m], j) = fm.predict_proba(ds.X.row(members[m]));
        }
    }
    return p;
}

inline Matrix error_table(const Matrix& p, const std::vector<int>& y) {
    Matrix e(p.rows, p.cols);
    for (std::size_t i = 0; i < p.rows; ++i)
        for (std::size_t j = 0; j < p.cols; ++j)
            e(i, j) = std::abs(p(i, j) - (y[i] != 0 ? 1.0 : 0.0));
    return e;
}

// Advantage-adjusted association rule: the whole model's error drops by w,
// local models' errors drop by s, then d_ij = 1 iff e'_ij <= e'_iL.
inline Matrix build_decision_table(const Matrix& e, const ClusterSet& clusters, double w,
                                   double s) {
    std::size_t q = e.rows;
    std::size_t l = e.cols;
    if (l != clusters.L) throw UsageError("decision table dimension mismatch");

    std::vector<std::vector<bool>> member(l - 1, std::vector<bool>(q, false));
    for (std::size_t j = 0; j + 1 < l; ++j)
        for (std::size_t i : clusters.clusters[j]) member[j][i] = true;

    Matrix d(q, l);
    for (std::size_t i = 0; i < q; ++i) {
        double whole = e(i, l - 1) - w;
        for (std::size_t j = 0; j + 1 < l; ++j) {
            double adj = e(i, j) - (member[j][i] ? s : 0.0);
            d(i, j) = adj <= whole ? 1.0 : 0.0;
        }
        d(i, l - 1) = 1.0;  // column L compares to itself
    }
    return d;
}

struct IceModel {
    Matrix train_X;  // normalized features retained for neighbor search
    std::vector<int> train_Y;
    ClusterSet clusters;
    std::vector<TrainedModel> pool;  // pool.back() = whole model
    Matrix E;                        // raw error table, kept for re-sweeps
    Matrix D;
    IceParams params;
    Scaler scaler;
    std::vector<EncodedColumn> schema;  // empty when trained from an in-memory Dataset
};

// Full training pipeline over an already-normalized dataset.
inline IceModel train_ice(const Dataset& ds, const IceParams& params, const Learner& base,
                          const Scaler& scaler = {}, PredictionAudit* audit = nullptr) {
    params.validate();
    bool has0 = false, has1 = false;
    for (int yv : ds.Y) (yv != 0 ? has1 : has0) = true;
    if (!has0 || !has1) throw DataError("training data must contain both classes");

    IceModel model;
    auto [clusters, art] = fuzzy_cluster(ds.X, params.L, params.restart_p, params.z);
    model.clusters = std::move(clusters);

    for (std::size_t j = 0; j < model.clusters.L; ++j) {
        Matrix mx = detail::submatrix(ds.X, model.clusters.clusters[j]);
        std::vector<int> my = detail::subset(ds.Y, model.clusters.clusters[j]);
        model.pool.push_back(fit_or_constant(base, mx, my));
    }

    Matrix p = build_prediction_matrix(ds, model.clusters, base, params.cv_folds, params.seed,
                                       &model.pool, audit);
    model.E = error_table(p, ds.Y);
    model.D = build_decision_table(model.E, model.clusters, params.w, params.s);
    model.train_X = ds.X;
    model.train_Y = ds.Y;
    model.params = params;
    model.params.z = model.clusters.z;                 // resolved default
    model.params.L = model.clusters.L;                 // after any capping
    model.scaler = scaler;
    if (model.scaler.means.empty()) {
        model.scaler.means.assign(ds.R(), 0.0);  // identity scaler
        model.scaler.stds.assign(ds.R(), 1.0);
    }
    return model;
}

}  // namespace ice

#endif
