#ifndef ICE_EVALUATION_HPP_
#define ICE_EVALUATION_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "association.hpp"
#include "common.hpp"
#include "data.hpp"
#include "inference.hpp"
#include "learners.hpp"

namespace ice {

// Mann-Whitney AUC via average ranks; ties count half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw UsageError("auc: size mismatch");
    std::size_t n = scores.size();
    std::size_t npos = 0;
    for (int y : labels)
        if (y != 0) ++npos;
    std::size_t nneg = n - npos;
    if (npos == 0 || nneg == 0) throw DataError("auc needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
        i = j;
    }
    double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

enum class Method { ice, bagging, adaboost, base };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::ice: return "ice";
        case Method::bagging: return "bagging";
        case Method::adaboost: return "adaboost";
        case Method::base: return "base";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    if (s == "ice") return Method::ice;
    if (s == "bagging") return Method::bagging;
    if (s == "adaboost") return Method::adaboost;
    if (s == "base") return Method::base;
    throw UsageError("unknown method: " + s);
}

enum class NormalizeMode { per_fold, global };

struct EvalRow {
    std::string dataset;
    std::string method;
    int fold = 0;
    double auc = 0.0;
    double mean_models = 0.0;
    double seconds = 0.0;
};

struct CrossValOptions {
    int outer_folds = 10;
    NormalizeMode normalize = NormalizeMode::per_fold;
    int n_bags = 100;
    int boost_rounds = 100;
    std::string dataset_id = "data";
};

struct AblationFlags {
    bool randomize_c1 = false;  // clusters -> bootstrap bags of equal sizes
    bool randomize_c2 = false;  // decision table rows shuffled
    bool randomize_c3 = false;  // KNN -> random neighbor selection
};

namespace detail {

struct FoldSplit {
    std::vector<std::size_t> train, test;
};

inline std::vector<FoldSplit> outer_splits(const std::vector<int>& y, int folds,
                                           std::uint64_t seed) {
    FoldAssignment fa = stratified_folds(y, folds, seed);
    std::vector<FoldSplit> out(static_cast<std::size_t>(fa.k));
    for (std::size_t i = 0; i < y.size(); ++i)
        for (int f = 0; f < fa.k; ++f)
            (fa.fold_of[i] == f ? out[static_cast<std::size_t>(f)].test
                                : out[static_cast<std::size_t>(f)].train)
                .push_back(i);
    return out;
}

// Random neighbor selection replacing KNN in the C3 ablation arm.
inline std::vector<std::size_t> random_neighbors(std::size_t q, std::size_t n, Rng& g) {
    std::vector<std::size_t> pool(q);
    std::iota(pool.begin(), pool.end(), 0);
    shuffle_det(pool, g);
    pool.resize(std::min(n, q));
    return pool;
}

}  // namespace detail

// Trains ICE on one outer-fold training set with optional component
// randomization, then scores the test rows. Shared by cross_validate and
// ablate so the identity ablation is exact.
inline EvalRow run_ice_fold(const Dataset& ds, const detail::FoldSplit& split,
                            const IceParams& params, const Learner& base, const Scaler& scaler,
                            const AblationFlags& flags, std::uint64_t fold_seed) {
    Dataset train;
    train.X = detail::submatrix(ds.X, split.train);
    train.Y = detail::subset(ds.Y, split.train);
    apply_scaler(scaler, train.X);

    IceParams p = params;
    p.seed = fold_seed;

    IceModel model;
    if (flags.randomize_c1) {
        // keep the fuzzy-cluster geometry only for its size profile
        auto [clusters, art] = fuzzy_cluster(train.X, p.L, p.restart_p, p.z);
        ClusterSet bags = clusters;
        Rng g(mix_seed(fold_seed, 0xC1));
        std::vector<std::vector<std::size_t>> multisets(clusters.L - 1);
        for (std::size_t j = 0; j + 1 < clusters.L; ++j) {
            std::size_t sz = clusters.clusters[j].size();
            std::set<std::size_t> uniq;
            for (std::size_t t = 0; t < sz; ++t) {
                std::size_t idx = uniform_index(g, train.Q());
                multisets[j].push_back(idx);
                uniq.insert(idx);
            }
            bags.clusters[j].assign(uniq.begin(), uniq.end());
        }
        model.clusters = bags;
        for (std::size_t j = 0; j < bags.L; ++j) {
            const auto& rows = j + 1 < bags.L ? multisets[j] : bags.clusters[j];
            Matrix mx = detail::submatrix(train.X, rows);
            std::vector<int> my = detail::subset(train.Y, rows);
            model.pool.push_back(fit_or_constant(base, mx, my));
        }
        Matrix pm = build_prediction_matrix(train, bags, base, p.cv_folds, p.seed, &model.pool);
        model.E = error_table(pm, train.Y);
        model.D = build_decision_table(model.E, bags, p.w, p.s);
        model.train_X = train.X;
        model.train_Y = train.Y;
        model.params = p;
        model.params.L = bags.L;
        model.scaler = scaler;
    } else {
        model = train_ice(train, p, base, scaler);
    }

    if (flags.randomize_c2 && model.D.rows > 1) {
        std::vector<std::size_t> perm(model.D.rows);
        std::iota(perm.begin(), perm.end(), 0);
        Rng g(mix_seed(fold_seed, 0xC2));
        do {
            shuffle_det(perm, g);
        } while (std::is_sorted(perm.begin(), perm.end()));
        Matrix shuffled(model.D.rows, model.D.cols);
        for (std::size_t i = 0; i < model.D.rows; ++i)
            for (std::size_t j = 0; j < model.D.cols; ++j) shuffled(i, j) = model.D(perm[i], j);
        model.D = std::move(shuffled);
    }

    std::vector<double> scores;
    std::vector<int> labels;
    double model_count = 0.0;
    for (std::size_t t = 0; t < split.test.size(); ++t) {
        std::size_t i = split.test[t];
        PredictionContext ctx;
        if (flags.randomize_c3) {
            std::vector<double> x = apply_scaler(model.scaler, ds.X.row(i));
            Rng g(mix_seed(fold_seed, 0xC3000000ULL + i));
            ctx.neighbor_indices = detail::random_neighbors(model.train_X.rows, p.N, g);
            ctx.selected_models = collect_models(model.D, ctx.neighbor_indices);
            ctx.M = ctx.selected_models.size();
            ctx.unique_models =
                std::set<std::size_t>(ctx.selected_models.begin(), ctx.selected_models.end())
                    .size();
            for (std::size_t jm : ctx.selected_models)
                ctx.partial_probs.push_back(model.pool[jm].predict_proba(x));
            ctx.whole_prob = model.pool.back().predict_proba(x);
            ctx.final_prob = combine(ctx.partial_probs, ctx.whole_prob,
                                     ctx.neighbor_indices.size(), p.alpha, p.beta);
        } else {
            ctx = predict_instance(ds.X.row(i), model);
        }
        scores.push_back(ctx.final_prob);
        labels.push_back(ds.Y[i]);
        model_count += static_cast<double>(ctx.unique_models);
    }

    EvalRow row;
    row.auc = auc(scores, labels);
    row.mean_models = split.test.empty() ? 0.0 : model_count / static_cast<double>(split.test.size());
    return row;
}

inline std::vector<EvalRow> cross_validate(const Dataset& ds, Method method,
                                           const IceParams& params, const Learner& base,
                                           const CrossValOptions& opt = {}) {
    std::vector<detail::FoldSplit> splits =
        detail::outer_splits(ds.Y, opt.outer_folds, params.seed);

    std::optional<Scaler> global_scaler;
    if (opt.normalize == NormalizeMode::global) global_scaler = fit_scaler(ds.X);

    std::vector<EvalRow> rows;
    for (std::size_t f = 0; f < splits.size(); ++f) {
        auto t0 = std::chrono::steady_clock::now();
        const auto& split = splits[f];
        std::uint64_t fold_seed = mix_seed(params.seed, f);

        Scaler scaler =
            global_scaler ? *global_scaler : fit_scaler(detail::submatrix(ds.X, split.train));

        EvalRow row;
        if (method == Method::ice) {
            row = run_ice_fold(ds, split, params, base, scaler, AblationFlags{}, fold_seed);
        } else {
            Matrix tx = detail::submatrix(ds.X, split.train);
            apply_scaler(scaler, tx);
            std::vector<int> ty = detail::subset(ds.Y, split.train);

            TrainedModel m;
            switch (method) {
                case Method::bagging:
                    m = fit_bagging(tx, ty, base, opt.n_bags, fold_seed);
                    break;
                case Method::adaboost:
                    m = fit_adaboost(tx, ty, base, opt.boost_rounds);
                    break;
                default:
                    m = fit_or_constant(base, tx, ty);
                    break;
            }
            std::vector<double> scores;
            std::vector<int> labels;
            for (std::size_t i : split.test) {
                std::vector<double> x = apply_scaler(scaler, ds.X.row(i));
                scores.push_back(m.predict_proba(std::span<const double>(x)));
                labels.push_back(ds.Y[i]);
            }
            row.auc = auc(scores, labels);
            row.mean_models =
                m.kind == ModelKind::bagging || m.kind == ModelKind::adaboost
                    ? static_cast<double>(m.members.size())
                    : 1.0;
        }
        row.dataset = opt.dataset_id;
        row.method = to_string(method);
        row.fold = static_cast<int>(f);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
    }
    return rows;
}

// Randomized-control runs; alpha and beta forced to 0 per the ablation
// protocol. All flags off reproduces the standard pipeline exactly.
inline std::vector<EvalRow> ablate(const Dataset& ds, const AblationFlags& flags,
                                   const IceParams& params, const Learner& base,
                                   const CrossValOptions& opt = {}) {
    IceParams p = params;
    p.alpha = 0.0;
    p.beta = 0.0;

    std::string method_id = std::string("ice_c") + (flags.randomize_c1 ? "1" : "-") +
                            (flags.randomize_c2 ? "2" : "-") + (flags.randomize_c3 ? "3" : "-");

    std::vector<detail::FoldSplit> splits = detail::outer_splits(ds.Y, opt.outer_folds, p.seed);
    std::optional<Scaler> global_scaler;
    if (opt.normalize == NormalizeMode::global) global_scaler = fit_scaler(ds.X);

    std::vector<EvalRow> rows;
    for (std::size_t f = 0; f < splits.size(); ++f) {
        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t fold_seed = mix_seed(p.seed, f);
        Scaler scaler = global_scaler ? *global_scaler
                                      : fit_scaler(detail::submatrix(ds.X, splits[f].train));
        EvalRow row = run_ice_fold(ds, splits[f], p, base, scaler, flags, fold_seed);
        row.dataset = opt.dataset_id;
        row.method = method_id;
        row.fold = static_cast<int>(f);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
    }
    return rows;
}

struct KMeansResult {
    std::vector<int> assign;
    Matrix centroids;
};

// Lloyd iterations with seeded k-means++ initialization; empty clusters are
// re-seeded from the farthest point.
inline KMeansResult kmeans(const Matrix& X, std::size_t k, std::uint64_t seed, int max_iter = 100) {
    std::size_t q = X.rows;
    if (k < 1 || k > q) throw UsageError("kmeans: k must be in [1, Q]");
    Rng g(mix_seed(seed, 0x4B4DULL));

    Matrix centroids(k, X.cols);
    std::vector<std::size_t> chosen;
    chosen.push_back(uniform_index(g, q));
    std::vector<double> d2(q);
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c : chosen) best = std::min(best, squared_distance(X.row(i), X.row(c)));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = uniform_real(g) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < q; ++i) {
                acc += d2[i];
                if (acc >= u) {
                    pick = i;
                    break;
                }
            }
        } else {
            while (std::find(chosen.begin(), chosen.end(), pick) != chosen.end()) ++pick;
        }
        chosen.push_back(pick);
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < X.cols; ++j) centroids(c, j) = X(chosen[c], j);

    std::vector<int> assign(q, -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < q; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = squared_distance(X.row(i), centroids.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != static_cast<int>(best)) {
                assign[i] = static_cast<int>(best);
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        std::vector<std::size_t> counts(k, 0);
        Matrix sums(k, X.cols);
        for (std::size_t i = 0; i < q; ++i) {
            ++counts[static_cast<std::size_t>(assign[i])];
            for (std::size_t j = 0; j < X.cols; ++j)
                sums(static_cast<std::size_t>(assign[i]), j) += X(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < q; ++i) {
                    double d = squared_distance(
                        X.row(i), centroids.row(static_cast<std::size_t>(assign[i])));
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                for (std::size_t j = 0; j < X.cols; ++j) centroids(c, j) = X(far, j);
            } else {
                for (std::size_t j = 0; j < X.cols; ++j)
                    centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            }
        }
    }
    return {std::move(assign), std::move(centroids)};
}

struct SubdomainReport {
    // rows: test clusters a,b,c (by decreasing size); cols: training sources
    // a,b,c,whole. gain = AUC(source) - AUC(whole).
    double aucs[3][4] = {};
    double gains[3][4] = {};
    bool applicable[3] = {false, false, false};
    std::size_t cluster_sizes[3] = {};
};

// Cross-testing experiment: can a cluster-trained model beat a size-matched
// whole-data model on that cluster? 5-fold CV inside each test cluster,
// 5 seeded redraws of the size-matched training sets per cell.
inline SubdomainReport subdomain_evidence(const Dataset& ds, const Learner& base,
                                          std::uint64_t seed, int repeats = 5, int cv_folds = 5) {
    std::size_t q = ds.Q();
    KMeansResult km = kmeans(ds.X, 3, seed);

    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t i = 0; i < q; ++i)
        groups[static_cast<std::size_t>(km.assign[i])].push_back(i);
    std::vector<std::size_t> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return groups[a].size() > groups[b].size();
    });

    SubdomainReport rep;
    for (std::size_t t = 0; t < 3; ++t) {
        const std::vector<std::size_t>& test_cluster = groups[order[t]];
        rep.cluster_sizes[t] = test_cluster.size();
        std::vector<int> ty = detail::subset(ds.Y, test_cluster);
        bool has0 = false, has1 = false;
        for (int yv : ty) (yv != 0 ? has1 : has0) = true;
        if (test_cluster.size() < 10 || !has0 || !has1) continue;
        rep.applicable[t] = true;

        FoldAssignment fa =
            stratified_folds(ty, std::min<int>(cv_folds, static_cast<int>(test_cluster.size())),
                             mix_seed(seed, 0x5D00 + t));

        for (std::size_t s = 0; s < 4; ++s) {
            std::vector<std::size_t> source;
            if (s < 3) {
                source = groups[order[s]];
            } else {
                source.resize(q);
                std::iota(source.begin(), source.end(), 0);
            }

            double auc_sum = 0.0;
            for (int repi = 0; repi < repeats; ++repi) {
                std::vector<double> scores(test_cluster.size(), 0.0);
                for (int f = 0; f < fa.k; ++f) {
                    std::vector<bool> in_fold(q, false);
                    std::vector<std::size_t> fold_members;
                    for (std::size_t m = 0; m < test_cluster.size(); ++m)
                        if (fa.fold_of[m] == f) {
                            in_fold[test_cluster[m]] = true;
                            fold_members.push_back(m);
                        }
                    if (fold_members.empty()) continue;

                    std::size_t n_target = test_cluster.size() - fold_members.size();
                    std::vector<std::size_t> pool;
                    for (std::size_t i : source)
                        if (!in_fold[i]) pool.push_back(i);

                    Rng g(mix_seed(seed, 0xE0000000ULL + (t << 16) + (s << 8) +
                                             static_cast<std::uint64_t>(repi * 16 + f)));
                    std::vector<std::size_t> train_idx;
                    if (pool.size() >= n_target) {
                        shuffle_det(pool, g);
                        train_idx.assign(pool.begin(),
                                         pool.begin() + static_cast<std::ptrdiff_t>(n_target));
                    } else {
                        // small source: use all of it and top up from the rest
                        train_idx = pool;
                        std::vector<bool> used(q, false);
                        for (std::size_t i : pool) used[i] = true;
                        std::vector<std::size_t> rest;
                        for (std::size_t i = 0; i < q; ++i)
                            if (!used[i] && !in_fold[i]) rest.push_back(i);
                        shuffle_det(rest, g);
                        for (std::size_t i : rest) {
                            if (train_idx.size() >= n_target) break;
                            train_idx.push_back(i);
                        }
                    }
                    std::sort(train_idx.begin(), train_idx.end());

                    Matrix tx = detail::submatrix(ds.X, train_idx);
                    std::vector<int> tyy = detail::subset(ds.Y, train_idx);
                    TrainedModel m = fit_or_constant(base, tx, tyy);
                    for (std::size_t mi : fold_members)
                        scores[mi] = m.predict_proba(ds.X.row(test_cluster[mi]));
                }
                auc_sum += auc(scores, ty);
            }
            rep.aucs[t][s] = auc_sum / static_cast<double>(repeats);
        }
        for (std::size_t s = 0; s < 4; ++s) rep.gains[t][s] = rep.aucs[t][s] - rep.aucs[t][3];
    }
    return rep;
}

// Pearson correlation between feature-space similarity (negative Euclidean
// distance) and decision-row similarity (matching-bit fraction) over all
// instance pairs.
inline double consistency_score(const Matrix& X, const Matrix& D) {
    std::size_t q = X.rows;
    if (q < 3) throw UsageError("consistency_score needs Q >= 3");
    if (D.rows != q) throw UsageError("consistency_score: row mismatch");

    std::vector<double> fs, dsim;
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = i + 1; j < q; ++j) {
            fs.push_back(-std::sqrt(squared_distance(X.row(i), X.row(j))));
            std::size_t match = 0;
            for (std::size_t c = 0; c < D.cols; ++c)
                if ((D(i, c) != 0.0) == (D(j, c) != 0.0)) ++match;
            dsim.push_back(static_cast<double>(match) / static_cast<double>(D.cols));
        }

    double n = static_cast<double>(fs.size());
    double ma = std::accumulate(fs.begin(), fs.end(), 0.0) / n;
    double mb = std::accumulate(dsim.begin(), dsim.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        double a = fs[i] - ma, b = dsim[i] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Two-sided paired t-test p-value on per-dataset differences.
inline double paired_t_pvalue(const std::vector<double>& diffs) {
    std::size_t n = diffs.size();
    if (n < 2) return 1.0;
    double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
    double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    double df = static_cast<double>(n - 1);

    // regularized incomplete beta by continued fraction (Lentz)
    auto betacf = [](double a, double b, double x) {
        const int maxit = 200;
        const double eps = 3e-12, fpmin = 1e-300;
        double qab = a + b, qap = a + 1.0, qam = a - 1.0;
        double c = 1.0, d = 1.0 - qab * x / qap;
        if (std::abs(d) < fpmin) d = fpmin;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= maxit; ++m) {
            double m2 = 2.0 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::abs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::abs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < eps) break;
        }
        return h;
    };
    auto ibeta = [&](double a, double b, double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
        double front = std::exp(ln);
        if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
        return 1.0 - front * betacf(b, a, 1.0 - x) / b;
    };
    return ibeta(df / 2.0, 0.5, df / (df + t * t));
}

struct MethodAggregate {
    double mean_auc = 0.0;
    int wins = 0, ties = 0, losses = 0;  // vs the reference method, per dataset
};

// Per-dataset mean fold AUC, then win/tie/loss against a reference method.
// Ties within 1e-6 count as ties.
inline std::map<std::string, MethodAggregate> aggregate_report(const std::vector<EvalRow>& rows,
                                                               const std::string& reference) {
    std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;  // method->dataset
    for (const auto& r : rows) {
        auto& cell = acc[r.method][r.dataset];
        cell.first += r.auc;
        cell.second += 1;
    }
    std::map<std::string, std::map<std::string, double>> means;
    for (const auto& [method, per_ds] : acc)
        for (const auto& [dsid, sum_count] : per_ds)
            means[method][dsid] = sum_count.first / sum_count.second;

    std::map<std::string, MethodAggregate> out;
    for (const auto& [method, per_ds] : means) {
        MethodAggregate agg;
        double total = 0.0;
        for (const auto& [dsid, mean_auc] : per_ds) {
            total += mean_auc;
            auto ref_it = means.find(reference);
            if (ref_it != means.end()) {
                auto cell = ref_it->second.find(dsid);
                if (cell != ref_it->second.end()) {
                    double d = mean_auc - cell->second;
                    if (std::abs(d) <= 1e-6)
                        ++agg.ties;
                    else if (d > 0)
                        ++agg.wins;
                    else
                        ++agg.losses;
                }
            }
        }
        agg.mean_auc = per_ds.empty() ? 0.0 : total / static_cast<double>(per_ds.size());
        out[method] = agg;
    }
    return out;
}

}  // namespace ice

#endif
