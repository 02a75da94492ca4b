#ifndef ICE_LEARNERS_HPP_
#define ICE_LEARNERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace ice {

enum class ModelKind { logistic, stump, bagging, adaboost, constant };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::logistic: return "logistic";
        case ModelKind::stump: return "stump";
        case ModelKind::bagging: return "bagging";
        case ModelKind::adaboost: return "adaboost";
        case ModelKind::constant: return "constant";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::logistic;
    if (s == "stump") return ModelKind::stump;
    if (s == "bagging") return ModelKind::bagging;
    if (s == "adaboost") return ModelKind::adaboost;
    if (s == "constant") return ModelKind::constant;
    throw DataError("unknown model kind: " + s);
}

struct TrainedModel {
    ModelKind kind = ModelKind::constant;

    // logistic
    std::vector<double> coef;
    double intercept = 0.0;

    // stump: predicts class 1 when polarity*x[feature] > polarity*threshold
    std::size_t feature = 0;
    double threshold = 0.0;
    int polarity = 1;

    // bagging / adaboost
    std::vector<TrainedModel> members;
    std::vector<double> weights;  // adaboost alphas; unused by bagging

    // constant
    double prior = 0.5;

    double predict_proba(std::span<const double> x) const {
        switch (kind) {
            case ModelKind::logistic: {
                double t = intercept;
                for (std::size_t j = 0; j < coef.size(); ++j) t += coef[j] * x[j];
                return 1.0 / (1.0 + std::exp(-t));
            }
            case ModelKind::stump: {
                bool one = polarity > 0 ? x[feature] > threshold : x[feature] <= threshold;
                return one ? 0.99 : 0.01;
            }
            case ModelKind::bagging: {
                double s = 0.0;
                for (const auto& m : members) s += m.predict_proba(x);
                return s / static_cast<double>(members.size());
            }
            case ModelKind::adaboost: {
                double score = 0.0;
                for (std::size_t t = 0; t < members.size(); ++t) {
                    double h = members[t].predict_proba(x) >= 0.5 ? 1.0 : -1.0;
                    score += weights[t] * h;
                }
                return 1.0 / (1.0 + std::exp(-2.0 * score));
            }
            case ModelKind::constant: return prior;
        }
        return 0.5;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = to_string(kind);
        switch (kind) {
            case ModelKind::logistic:
                j["coef"] = coef;
                j["intercept"] = intercept;
                break;
            case ModelKind::stump:
                j["feature"] = feature;
                j["threshold"] = threshold;
                j["polarity"] = polarity;
                break;
            case ModelKind::bagging:
            case ModelKind::adaboost: {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& m : members) arr.push_back(m.to_json());
                j["members"] = std::move(arr);
                if (kind == ModelKind::adaboost) j["weights"] = weights;
                break;
            }
            case ModelKind::constant:
                j["prior"] = prior;
                break;
        }
        return j;
    }

    static TrainedModel from_json(const nlohmann::json& j) {
        TrainedModel m;
        m.kind = model_kind_from_string(j.at("kind").get<std::string>());
        switch (m.kind) {
            case ModelKind::logistic:
                m.coef = j.at("coef").get<std::vector<double>>();
                m.intercept = j.at("intercept").get<double>();
                break;
            case ModelKind::stump:
                m.feature = j.at("feature").get<std::size_t>();
                m.threshold = j.at("threshold").get<double>();
                m.polarity = j.at("polarity").get<int>();
                break;
            case ModelKind::bagging:
            case ModelKind::adaboost:
                for (const auto& mj : j.at("members")) m.members.push_back(from_json(mj));
                if (m.kind == ModelKind::adaboost)
                    m.weights = j.at("weights").get<std::vector<double>>();
                break;
            case ModelKind::constant:
                m.prior = j.at("prior").get<double>();
                break;
        }
        return m;
    }
};

inline TrainedModel fit_constant(const std::vector<int>& y, const std::vector<double>* w = nullptr) {
    if (y.empty()) throw UsageError("fit_constant on empty labels");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double wi = w ? (*w)[i] : 1.0;
        num += wi * (y[i] != 0 ? 1.0 : 0.0);
        den += wi;
    }
    TrainedModel m;
    m.kind = ModelKind::constant;
    m.prior = std::clamp(den > 0.0 ? num / den : 0.5, 0.01, 0.99);
    return m;
}

namespace detail {

// Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                        std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300) {
            a[piv * n + col] = 1e-300;  // ridge keeps the solve defined on degenerate systems
        }
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    return x;
}

inline double logistic_loss(const Matrix& X, const std::vector<int>& y,
                            const std::vector<double>* w, const std::vector<double>& beta,
                            double intercept, double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double t = intercept;
        auto xi = X.row(i);
        for (std::size_t j = 0; j < X.cols; ++j) t += beta[j] * xi[j];
        double wi = w ? (*w)[i] : 1.0;
        // -log sigma(t) = log(1+exp(-t)), computed stably
        double log1pexp = t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
        loss += wi * (y[i] != 0 ? log1pexp : log1pexp + t);
    }
    double reg = 0.0;
    for (double b : beta) reg += b * b;
    return loss + 0.5 * lambda * reg;
}

}  // namespace detail

// Weighted L2-regularized logistic regression by damped Newton iterations.
// Intercept unregularized, zero initialization.
inline TrainedModel fit_logistic(const Matrix& X, const std::vector<int>& y,
                                 const std::vector<double>* w = nullptr, double lambda = 1.0,
                                 int max_iter = 100, double tol = 1e-8) {
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double wi = w ? (*w)[i] : 1.0;
        if (wi <= 0.0) continue;
        (y[i] != 0 ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw UsageError("fit_logistic needs both classes present");

    std::size_t n = X.rows, r = X.cols;
    std::size_t d = r + 1;  // last slot = intercept
    std::vector<double> beta(r, 0.0);
    double intercept = 0.0;
    double loss = detail::logistic_loss(X, y, w, beta, intercept, lambda);

    std::vector<double> grad(d), hess(d * d), prob(n);
    for (int it = 0; it < max_iter; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double t = intercept;
            auto xi = X.row(i);
            for (std::size_t j = 0; j < r; ++j) t += beta[j] * xi[j];
            double p = 1.0 / (1.0 + std::exp(-t));
            prob[i] = p;
            double wi = w ? (*w)[i] : 1.0;
            double g = wi * (p - (y[i] != 0 ? 1.0 : 0.0));
            double h = wi * p * (1.0 - p);
            for (std::size_t j = 0; j < r; ++j) {
                grad[j] += g * xi[j];
                for (std::size_t k2 = j; k2 < r; ++k2) hess[j * d + k2] += h * xi[j] * xi[k2];
                hess[j * d + r] += h * xi[j];
            }
            grad[r] += g;
            hess[r * d + r] += h;
        }
        for (std::size_t j = 0; j < r; ++j) {
            grad[j] += lambda * beta[j];
            hess[j * d + j] += lambda;
        }
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k2 = 0; k2 < j; ++k2) hess[j * d + k2] = hess[k2 * d + j];

        std::vector<double> step = detail::solve_linear(hess, grad, d);
        double gmax = 0.0;
        for (double gv : grad) gmax = std::max(gmax, std::abs(gv));
        if (gmax < tol) break;

        double scale = 1.0;
        bool moved = false;
        for (int half = 0; half < 30; ++half) {
            std::vector<double> nb(r);
            for (std::size_t j = 0; j < r; ++j) nb[j] = beta[j] - scale * step[j];
            double ni = intercept - scale * step[r];
            double nl = detail::logistic_loss(X, y, w, nb, ni, lambda);
            if (nl <= loss) {
                beta = std::move(nb);
                intercept = ni;
                double improvement = loss - nl;
                loss = nl;
                moved = true;
                if (improvement < tol) it = max_iter;  // converged
                break;
            }
            scale *= 0.5;
        }
        if (!moved) break;
    }

    TrainedModel m;
    m.kind = ModelKind::logistic;
    m.coef = std::move(beta);
    m.intercept = intercept;
    return m;
}

// Depth-1 stump: exhaustive search over features and midpoints, weighted 0/1
// error, ties to lower feature then lower threshold.
inline TrainedModel fit_stump(const Matrix& X, const std::vector<int>& y,
                              const std::vector<double>* w = nullptr) {
    std::size_t n = X.rows, r = X.cols;
    if (n == 0) throw UsageError("fit_stump on empty data");

    double best_err = std::numeric_limits<double>::infinity();
    TrainedModel best;
    best.kind = ModelKind::stump;

    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < r; ++f) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });

        std::vector<double> thresholds;
        thresholds.push_back(X(order[0], f) - 1.0);  // constant stump candidates
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double lo = X(order[i], f), hi = X(order[i + 1], f);
            if (hi > lo) thresholds.push_back(0.5 * (lo + hi));
        }

        for (double thr : thresholds) {
            double err_pos = 0.0, err_neg = 0.0;  // polarity +1 / -1
            for (std::size_t i = 0; i < n; ++i) {
                double wi = w ? (*w)[i] : 1.0;
                bool above = X(i, f) > thr;
                bool is1 = y[i] != 0;
                if (above != is1) err_pos += wi;  // +1 predicts 1 when above
                if (above == is1) err_neg += wi;
            }
            if (err_pos < best_err) {
                best_err = err_pos;
                best.feature = f;
                best.threshold = thr;
                best.polarity = 1;
            }
            if (err_neg < best_err) {
                best_err = err_neg;
                best.feature = f;
                best.threshold = thr;
                best.polarity = -1;
            }
        }
    }
    if (r == 0) {
        // no features: degenerate constant stump on the majority class
        return fit_constant(y, w);
    }
    return best;
}

// Base-learner handle used by ensembles and by ICE training.
class Learner {
  public:
    virtual ~Learner() = default;
    virtual TrainedModel fit(const Matrix& X, const std::vector<int>& y,
                             const std::vector<double>* w = nullptr) const = 0;
};

class LogisticLearner : public Learner {
  public:
    explicit LogisticLearner(double lambda = 1.0, int max_iter = 100, double tol = 1e-8)
        : lambda_(lambda), max_iter_(max_iter), tol_(tol) {}
    TrainedModel fit(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* w = nullptr) const override {
        return fit_logistic(X, y, w, lambda_, max_iter_, tol_);
    }

  private:
    double lambda_;
    int max_iter_;
    double tol_;
};

class StumpLearner : public Learner {
  public:
    TrainedModel fit(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* w = nullptr) const override {
        return fit_stump(X, y, w);
    }
};

// Fall back to the class prior when only one class is present (or weighted
// support for a class vanishes).
inline TrainedModel fit_or_constant(const Learner& base, const Matrix& X,
                                    const std::vector<int>& y,
                                    const std::vector<double>* w = nullptr) {
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double wi = w ? (*w)[i] : 1.0;
        if (wi <= 0.0) continue;
        (y[i] != 0 ? has1 : has0) = true;
    }
    if (!has0 || !has1) return fit_constant(y, w);
    return base.fit(X, y, w);
}

inline TrainedModel fit_bagging(const Matrix& X, const std::vector<int>& y, const Learner& base,
                                int n_bags, std::uint64_t seed) {
    if (n_bags < 1) throw UsageError("n_bags must be >= 1");
    std::size_t n = X.rows;
    TrainedModel m;
    m.kind = ModelKind::bagging;
    for (int b = 0; b < n_bags; ++b) {
        Rng g(mix_seed(seed, static_cast<std::uint64_t>(b)));
        Matrix bx(n, X.cols);
        std::vector<int> by(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t src = uniform_index(g, n);
            by[i] = y[src];
            for (std::size_t j = 0; j < X.cols; ++j) bx(i, j) = X(src, j);
        }
        m.members.push_back(fit_or_constant(base, bx, by));
    }
    return m;
}

// Discrete AdaBoost on hard-thresholded member outputs; perfect members keep
// a capped alpha so the logistic link stays finite.
inline TrainedModel fit_adaboost(const Matrix& X, const std::vector<int>& y, const Learner& base,
                                 int n_rounds, double alpha_cap = 2.0) {
    if (n_rounds < 1) throw UsageError("n_rounds must be >= 1");
    std::size_t n = X.rows;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));

    TrainedModel m;
    m.kind = ModelKind::adaboost;
    for (int t = 0; t < n_rounds; ++t) {
        TrainedModel member = fit_or_constant(base, X, y, &w);
        std::vector<int> h(n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            h[i] = member.predict_proba(X.row(i)) >= 0.5 ? 1 : -1;
            int yi = y[i] != 0 ? 1 : -1;
            if (h[i] != yi) err += w[i];
        }
        if (err >= 0.5) break;
        double alpha;
        if (err <= 0.0) {
            alpha = alpha_cap;
        } else {
            alpha = std::min(alpha_cap, 0.5 * std::log((1.0 - err) / err));
        }
        m.members.push_back(member);
        m.weights.push_back(alpha);
        if (err <= 0.0) break;

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int yi = y[i] != 0 ? 1 : -1;
            w[i] *= std::exp(-alpha * yi * h[i]);
            total += w[i];
        }
        for (std::size_t i = 0; i < n; ++i) w[i] /= total;
    }
    if (m.members.empty()) return fit_constant(y);  // every round abstained
    return m;
}

class BaggingLearner : public Learner {
  public:
    BaggingLearner(std::shared_ptr<const Learner> base, int n_bags, std::uint64_t seed)
        : base_(std::move(base)), n_bags_(n_bags), seed_(seed) {}
    TrainedModel fit(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* /*w*/ = nullptr) const override {
        return fit_bagging(X, y, *base_, n_bags_, seed_);
    }

  private:
    std::shared_ptr<const Learner> base_;
    int n_bags_;
    std::uint64_t seed_;
};

class AdaBoostLearner : public Learner {
  public:
    AdaBoostLearner(std::shared_ptr<const Learner> base, int n_rounds)
        : base_(std::move(base)), n_rounds_(n_rounds) {}
    TrainedModel fit(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* /*w*/ = nullptr) const override {
        return fit_adaboost(X, y, *base_, n_rounds_);
    }

  private:
    std::shared_ptr<const Learner> base_;
    int n_rounds_;
};

}  // namespace ice

#endif
