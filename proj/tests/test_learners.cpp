#include <doctest.h>

#include <cmath>

#include "ice/learners.hpp"
#include "support/synth.hpp"

namespace {

ice::Matrix col(const std::vector<double>& xs) {
    ice::Matrix m(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
    return m;
}

double loss_at(const ice::Matrix& x, const std::vector<int>& y, const std::vector<double>& beta,
               double intercept, double lambda) {
    return ice::detail::logistic_loss(x, y, nullptr, beta, intercept, lambda);
}

}  // namespace

TEST_CASE("logistic learns the right slope on separable 1-D data") {
    ice::Matrix x = col({-1, -2, 1, 2});
    std::vector<int> y = {0, 0, 1, 1};
    ice::TrainedModel m = ice::fit_logistic(x, y, nullptr, 1.0);
    double hi[] = {2.0}, lo[] = {-2.0};
    CHECK(m.predict_proba(hi) > 0.5);
    CHECK(m.predict_proba(lo) < 0.5);
    CHECK(m.predict_proba(hi) > m.predict_proba(lo));
}

TEST_CASE("intercept-only logistic fit equals the class prior") {
    ice::Matrix x(4, 1);  // all-zero features
    std::vector<int> y = {1, 1, 1, 0};
    ice::TrainedModel m = ice::fit_logistic(x, y, nullptr, 1.0);
    double probe[] = {0.0};
    CHECK(m.predict_proba(probe) == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("huge lambda drives coefficients to zero") {
    ice::Matrix x = col({-2, -1, 1, 2});
    std::vector<int> y = {0, 0, 1, 1};
    ice::TrainedModel m = ice::fit_logistic(x, y, nullptr, 1e9);
    CHECK(std::abs(m.coef[0]) < 1e-6);
    double probe[] = {1.0};
    CHECK(m.predict_proba(probe) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("logistic rejects single-class input") {
    ice::Matrix x = col({1, 2});
    CHECK_THROWS_AS(ice::fit_logistic(x, {1, 1}), ice::UsageError);
}

TEST_CASE("logistic gradient matches central finite differences") {
    ice::Rng g(77);
    for (int trial = 0; trial < 5; ++trial) {
        std::size_t n = 12, r = 3;
        ice::Matrix x(n, r);
        for (auto& v : x.data) v = synth::gaussian(g);
        std::vector<int> y;
        for (std::size_t i = 0; i < n; ++i) y.push_back(i % 2);
        std::vector<double> beta = {0.3, -0.7, 0.2};
        double intercept = 0.1, lambda = 0.5, h = 1e-6;

        // analytic gradient
        std::vector<double> grad(r + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double t = intercept;
            for (std::size_t j = 0; j < r; ++j) t += beta[j] * x(i, j);
            double p = 1.0 / (1.0 + std::exp(-t));
            double gfac = p - y[i];
            for (std::size_t j = 0; j < r; ++j) grad[j] += gfac * x(i, j);
            grad[r] += gfac;
        }
        for (std::size_t j = 0; j < r; ++j) grad[j] += lambda * beta[j];

        for (std::size_t j = 0; j <= r; ++j) {
            auto bp = beta, bm = beta;
            double ip = intercept, im = intercept;
            if (j < r) {
                bp[j] += h;
                bm[j] -= h;
            } else {
                ip += h;
                im -= h;
            }
            double fd = (loss_at(x, y, bp, ip, lambda) - loss_at(x, y, bm, im, lambda)) / (2 * h);
            CHECK(std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])) < 1e-5);
        }
    }
}

TEST_CASE("stump finds the separating threshold") {
    ice::Matrix x = col({1, 2, 3, 4});
    std::vector<int> y = {0, 0, 1, 1};
    ice::TrainedModel m = ice::fit_stump(x, y);
    CHECK(m.threshold == doctest::Approx(2.5));
    CHECK(m.polarity == 1);
    for (std::size_t i = 0; i < 4; ++i) {
        double p = m.predict_proba(x.row(i));
        CHECK((p >= 0.5 ? 1 : 0) == y[i]);
        CHECK((p == 0.99 || p == 0.01));
    }
}

TEST_CASE("stump on a single point predicts its own label") {
    ice::Matrix x = col({3.0});
    ice::TrainedModel m1 = ice::fit_stump(x, {1});
    CHECK(m1.predict_proba(x.row(0)) == 0.99);
    ice::TrainedModel m0 = ice::fit_stump(x, {0});
    CHECK(m0.predict_proba(x.row(0)) == 0.01);
}

TEST_CASE("stump honors concentrated instance weights") {
    ice::Matrix x = col({1, 2, 3});
    std::vector<int> y = {1, 0, 1};
    std::vector<double> w = {0.0, 1.0, 0.0};
    ice::TrainedModel m = ice::fit_stump(x, y, &w);
    CHECK(m.predict_proba(x.row(1)) < 0.5);
}

TEST_CASE("bagging probability is the mean of member probabilities") {
    ice::TrainedModel ensemble;
    ensemble.kind = ice::ModelKind::bagging;
    for (int i = 0; i < 3; ++i) {
        ice::TrainedModel c;
        c.kind = ice::ModelKind::constant;
        c.prior = 0.6;
        ensemble.members.push_back(c);
    }
    double probe[] = {0.0};
    CHECK(ensemble.predict_proba(probe) == doctest::Approx(0.6));

    ensemble.members[0].prior = 0.3;
    CHECK(ensemble.predict_proba(probe) == doctest::Approx((0.3 + 0.6 + 0.6) / 3.0));
}

TEST_CASE("bagging is deterministic per seed") {
    ice::Dataset ds = synth::two_blobs(20, 2, 2.0, 5);
    ice::LogisticLearner base;
    ice::TrainedModel a = ice::fit_bagging(ds.X, ds.Y, base, 5, 99);
    ice::TrainedModel b = ice::fit_bagging(ds.X, ds.Y, base, 5, 99);
    REQUIRE(a.members.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.members[i].coef == b.members[i].coef);
        CHECK(a.members[i].intercept == b.members[i].intercept);
    }
}

TEST_CASE("adaboost perfect first round keeps one capped member") {
    ice::Matrix x = col({1, 2, 3, 4});
    std::vector<int> y = {0, 0, 1, 1};
    ice::TrainedModel m = ice::fit_adaboost(x, y, ice::StumpLearner{}, 10);
    REQUIRE(m.members.size() == 1);
    CHECK(m.weights[0] == doctest::Approx(2.0));
    double probe[] = {4.0};
    // sigma(2*2) ~ 0.982
    CHECK(m.predict_proba(probe) == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))));
    CHECK(m.predict_proba(probe) > 0.88);
}

TEST_CASE("adaboost training error non-increasing on separable data") {
    ice::Dataset ds = synth::two_blobs(15, 2, 3.0, 8);
    auto train_err = [&](int rounds) {
        ice::TrainedModel m = ice::fit_adaboost(ds.X, ds.Y, ice::StumpLearner{}, rounds);
        int errs = 0;
        for (std::size_t i = 0; i < ds.Q(); ++i)
            if ((m.predict_proba(ds.X.row(i)) >= 0.5 ? 1 : 0) != ds.Y[i]) ++errs;
        return errs;
    };
    int prev = train_err(1);
    for (int rounds : {2, 4, 8, 16}) {
        int e = train_err(rounds);
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("adaboost abstaining at round one falls back to the prior") {
    // constant learner always errs with rate >= 0.5 on a balanced set
    class Bad : public ice::Learner {
      public:
        ice::TrainedModel fit(const ice::Matrix&, const std::vector<int>& y,
                              const std::vector<double>*) const override {
            ice::TrainedModel m;
            m.kind = ice::ModelKind::constant;
            m.prior = 0.5;
            return m;
        }
    };
    ice::Matrix x = col({1, 2});
    ice::TrainedModel m = ice::fit_adaboost(x, {0, 1}, Bad{}, 5);
    CHECK(m.kind == ice::ModelKind::constant);
    CHECK(m.prior == doctest::Approx(0.5));
}

TEST_CASE("constant model: frequency, clipping, weights") {
    CHECK(ice::fit_constant({1, 1, 1, 0}).prior == doctest::Approx(0.75));
    CHECK(ice::fit_constant({1, 1}).prior == doctest::Approx(0.99));
    CHECK(ice::fit_constant({0, 0, 0}).prior == doctest::Approx(0.01));
    std::vector<double> w = {3.0, 1.0};
    std::vector<int> y = {1, 0};
    CHECK(ice::fit_constant(y, &w).prior == doctest::Approx(0.75));
}

TEST_CASE("predictions stay in [0,1] far outside the training range") {
    ice::Dataset ds = synth::two_blobs(15, 2, 2.0, 31);
    ice::LogisticLearner base;
    std::vector<ice::TrainedModel> models;
    models.push_back(base.fit(ds.X, ds.Y));
    models.push_back(ice::fit_stump(ds.X, ds.Y));
    models.push_back(ice::fit_bagging(ds.X, ds.Y, base, 4, 3));
    models.push_back(ice::fit_adaboost(ds.X, ds.Y, ice::StumpLearner{}, 4));
    models.push_back(ice::fit_constant(ds.Y));
    double extreme[][2] = {{1e9, -1e9}, {-1e12, 1e12}, {0, 0}};
    for (const auto& m : models)
        for (auto& e : extreme) {
            double p = m.predict_proba(std::span<const double>(e, 2));
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
}

TEST_CASE("serialization round trip is bit-identical") {
    ice::Dataset ds = synth::two_blobs(12, 3, 2.0, 41);
    ice::LogisticLearner base;
    std::vector<ice::TrainedModel> models;
    models.push_back(base.fit(ds.X, ds.Y));
    models.push_back(ice::fit_stump(ds.X, ds.Y));
    models.push_back(ice::fit_bagging(ds.X, ds.Y, base, 3, 17));
    models.push_back(ice::fit_adaboost(ds.X, ds.Y, ice::StumpLearner{}, 3));
    models.push_back(ice::fit_constant(ds.Y));

    ice::Rng g(55);
    for (const auto& m : models) {
        std::string text = m.to_json().dump();
        ice::TrainedModel back = ice::TrainedModel::from_json(nlohmann::json::parse(text));
        for (int probe = 0; probe < 10; ++probe) {
            std::vector<double> x(ds.R());
            for (auto& v : x) v = synth::gaussian(g) * 5.0;
            CHECK(m.predict_proba(x) == back.predict_proba(x));
        }
    }
}
