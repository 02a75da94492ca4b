#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ice/framework.hpp"
#include "ice/inference.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace {

ice::Matrix points_1d(const std::vector<double>& xs) {
    ice::Matrix m(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
    return m;
}

}  // namespace

TEST_CASE("find_neighbors basics") {
    ice::Matrix train = points_1d({0.0, 10.0, 20.0});
    double x9[] = {9.0};
    CHECK(ice::find_neighbors(x9, train, 2) == std::vector<std::size_t>{1, 0});

    double x10[] = {10.0};
    CHECK(ice::find_neighbors(x10, train, 1) == std::vector<std::size_t>{1});

    double x0[] = {0.0};
    auto all = ice::find_neighbors(x0, train, 3);
    CHECK(all == std::vector<std::size_t>{0, 1, 2});
    CHECK(ice::find_neighbors(x0, train, 99).size() == 3);  // N > Q returns all

    double bad[] = {0.0, 0.0};
    CHECK_THROWS_AS(ice::find_neighbors(bad, train, 1), ice::UsageError);
    // repeated calls identical
    CHECK(ice::find_neighbors(x9, train, 2) == ice::find_neighbors(x9, train, 2));
}

TEST_CASE("collect_models preserves duplicates and skips the whole column") {
    ice::Matrix d(3, 3);
    d(0, 0) = 1;
    d(0, 2) = 1;  // row 0: models {0}
    d(1, 0) = 1;
    d(1, 1) = 1;
    d(1, 2) = 1;  // row 1: models {0, 1}
    d(2, 2) = 1;  // row 2: only the whole column

    CHECK(ice::collect_models(d, {0, 1}) == std::vector<std::size_t>{0, 0, 1});
    CHECK(ice::collect_models(d, {2, 2}).empty());
    CHECK(ice::collect_models(d, {1, 1}) == std::vector<std::size_t>{0, 1, 0, 1});
}

TEST_CASE("combine matches hand-computed cases") {
    CHECK(ice::combine({}, 0.7, 5, 1.0, 1.0) == doctest::Approx(0.7));
    CHECK(ice::combine({0.8, 0.6}, 0.5, 5, 1.0, 1.0) == doctest::Approx(4.9 / 9.0));
    // alpha=beta=0: whole model fully ignored
    CHECK(ice::combine({1.0, 0.0, 0.5}, 0.9, 5, 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("combine zero-denominator fallback") {
    bool fb = false;
    CHECK(ice::combine({}, 0.42, 5, 0.0, 0.0, &fb) == doctest::Approx(0.42));
    CHECK(fb);
}

TEST_CASE("combine against the independent oracle on randomized cases") {
    ice::Rng g(2024);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t m = ice::uniform_index(g, 12);
        std::vector<double> partials;
        for (std::size_t i = 0; i < m; ++i) partials.push_back(ice::uniform_real(g));
        double whole = ice::uniform_real(g);
        std::size_t n = 1 + ice::uniform_index(g, 10);
        double alpha = ice::uniform_real(g) * 3.0;
        double beta = ice::uniform_real(g) * 3.0;
        double got = ice::combine(partials, whole, n, alpha, beta);
        double want = oracles::combine_oracle(partials, whole, n, alpha, beta);
        CHECK(std::abs(got - want) < 1e-12);
    }
}

TEST_CASE("combine convexity and the large-beta limit") {
    ice::Rng g(5150);
    for (int trial = 0; trial < 2000; ++trial) {
        std::size_t m = ice::uniform_index(g, 8);
        std::vector<double> partials;
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            partials.push_back(ice::uniform_real(g));
            lo = std::min(lo, partials.back());
            hi = std::max(hi, partials.back());
        }
        double whole = ice::uniform_real(g);
        lo = std::min(lo, whole);
        hi = std::max(hi, whole);
        std::size_t n = 1 + ice::uniform_index(g, 10);
        double alpha = ice::uniform_real(g) * 5.0;
        double beta = ice::uniform_real(g) * 5.0;
        double p = ice::combine(partials, whole, n, alpha, beta);
        CHECK(p >= lo - 1e-12);
        CHECK(p <= hi + 1e-12);
        // beta -> infinity pulls the output to the whole model
        CHECK(std::abs(ice::combine(partials, whole, n, alpha, 1e9) - whole) < 1e-6);
    }
}

TEST_CASE("predict_instance end to end") {
    ice::Dataset ds = synth::regime_flip(25, 2, 300);
    ice::IceParams params;
    params.L = 4;
    params.cv_folds = 3;
    params.N = 3;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);

    ice::PredictionContext ctx = ice::predict_instance(ds.X.row(0), model);
    CHECK(ctx.final_prob >= 0.0);
    CHECK(ctx.final_prob <= 1.0);
    CHECK(ctx.M == ctx.selected_models.size());
    CHECK(ctx.M == ice::collect_models(model.D, ctx.neighbor_indices).size());
    CHECK(ctx.neighbor_indices.size() == 3);
}

TEST_CASE("whole-only decision table reproduces the whole model everywhere") {
    ice::Dataset ds = synth::two_blobs(15, 2, 2.0, 301);
    ice::IceParams params;
    params.L = 3;
    params.cv_folds = 3;
    params.w = 0.0;
    params.s = 0.0;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);
    // zero out all partial columns
    for (std::size_t i = 0; i < model.D.rows; ++i)
        for (std::size_t j = 0; j + 1 < model.D.cols; ++j) model.D(i, j) = 0.0;

    for (std::size_t i = 0; i < 10; ++i) {
        ice::PredictionContext ctx = ice::predict_instance(ds.X.row(i), model);
        std::vector<double> x = ice::apply_scaler(model.scaler, ds.X.row(i));
        CHECK(ctx.M == 0);
        CHECK(ctx.final_prob == doctest::Approx(model.pool.back().predict_proba(x)));
    }
}

TEST_CASE("equal submodel outputs pass through unchanged") {
    std::vector<double> partials = {0.37, 0.37, 0.37};
    CHECK(ice::combine(partials, 0.37, 5, 1.0, 1.0) == doctest::Approx(0.37));
}
