#include <doctest.h>

#include <filesystem>

#include "ice/framework.hpp"
#include "support/synth.hpp"

namespace {

std::string temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    return p.string();
}

}  // namespace

TEST_CASE("fit resolves defaults and normalizes internally") {
    ice::Dataset ds = synth::two_blobs(25, 2, 2.5, 900);
    ice::IceParams params;
    params.L = 5;
    params.cv_folds = 3;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);

    CHECK(model.params.z == doctest::Approx(static_cast<double>(ds.Q()) / 3.0));
    CHECK(model.pool.size() == model.clusters.L);
    CHECK(model.scaler.means.size() == ds.R());
    // stored training matrix is the normalized one
    for (std::size_t j = 0; j < ds.R(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < model.train_X.rows; ++i) mean += model.train_X(i, j);
        CHECK(std::abs(mean / static_cast<double>(model.train_X.rows)) < 1e-9);
    }
    // raw-space probes go through the stored scaler
    ice::PredictionContext ctx = ice::predict_instance(ds.X.row(0), model);
    CHECK(ctx.final_prob >= 0.0);
    CHECK(ctx.final_prob <= 1.0);
}

TEST_CASE("fit works end to end at the minimum ensemble size") {
    ice::Dataset ds = synth::two_blobs(10, 2, 3.0, 901);
    ice::IceParams params;
    params.L = 2;
    params.cv_folds = 3;
    params.N = 2;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);
    CHECK(model.pool.size() == 2);
    for (std::size_t i = 0; i < ds.Q(); ++i) {
        double p = ice::predict_instance(ds.X.row(i), model).final_prob;
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("save and load reproduce predictions bit-exactly") {
    ice::Dataset ds = synth::regime_flip(20, 2, 902);
    ice::IceParams params;
    params.L = 4;
    params.cv_folds = 3;
    params.seed = 5;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);

    std::string dir = temp_dir("ice_t_model");
    ice::save_model(model, dir);
    ice::IceModel back = ice::load_model(dir);

    CHECK(back.params.seed == model.params.seed);
    CHECK(back.clusters.clusters == model.clusters.clusters);
    CHECK(back.D.data == model.D.data);
    CHECK(back.E.data == model.E.data);
    CHECK(back.train_X.data == model.train_X.data);

    ice::Rng g(903);
    for (int probe = 0; probe < 100; ++probe) {
        std::vector<double> x(ds.R());
        for (auto& v : x) v = synth::gaussian(g) * 4.0;
        ice::PredictionContext a = ice::predict_instance(x, model);
        ice::PredictionContext b = ice::predict_instance(x, back);
        CHECK(a.final_prob == b.final_prob);
        CHECK(a.neighbor_indices == b.neighbor_indices);
        CHECK(a.selected_models == b.selected_models);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("load_model rejects missing or corrupt directories") {
    CHECK_THROWS_AS(ice::load_model("/nonexistent/model_dir"), ice::DataError);
    std::string dir = temp_dir("ice_t_corrupt");
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(std::filesystem::path(dir) / "manifest.json");
        out << "{ not json";
    }
    CHECK_THROWS_AS(ice::load_model(dir), ice::DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("resweep_decision matches retraining with the new thresholds") {
    ice::Dataset ds = synth::regime_flip(20, 2, 904);
    ice::IceParams params;
    params.L = 4;
    params.cv_folds = 3;
    params.seed = 8;
    ice::LogisticLearner base;
    ice::IceModel model = ice::fit(ds, params, base);

    ice::IceParams alt = params;
    alt.w = 0.1;
    alt.s = 0.8;
    ice::IceModel retrained = ice::fit(ds, alt, base);
    ice::IceModel reswept = ice::resweep_decision(model, 0.1, 0.8);
    CHECK(reswept.D.data == retrained.D.data);
    CHECK(reswept.params.w == 0.1);
    CHECK(reswept.params.s == 0.8);

    // idempotence at the original thresholds
    ice::IceModel same = ice::resweep_decision(model, params.w, params.s);
    CHECK(same.D.data == model.D.data);

    // generous s admits at least as many local associations
    ice::IceModel loose = ice::resweep_decision(model, params.w, 1.0);
    double before = 0, after = 0;
    for (std::size_t j = 0; j + 1 < model.D.cols; ++j)
        for (std::size_t jj : model.clusters.clusters[j]) {
            before += model.D(jj, j);
            after += loose.D(jj, j);
        }
    CHECK(after >= before);

    ice::IceModel empty;
    CHECK_THROWS_AS(ice::resweep_decision(empty, 0.4, 0.5), ice::DataError);
}
