#ifndef ICE_FRAMEWORK_HPP_
#define ICE_FRAMEWORK_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "association.hpp"
#include "common.hpp"
#include "data.hpp"
#include "inference.hpp"

namespace ice {

// Public training entry point: fits the scaler, normalizes, trains.
inline IceModel fit(const Dataset& ds, const IceParams& params, const Learner& base) {
    Scaler scaler = fit_scaler(ds.X);
    Dataset normalized = ds;
    apply_scaler(scaler, normalized.X);
    return train_ice(normalized, params, base, scaler);
}

// Rebuilds D from the stored raw error table with new advantage scores;
// clustering and inner CV are not re-run.
inline IceModel resweep_decision(const IceModel& model, double w, double s) {
    if (model.E.rows == 0) throw DataError("model is missing the raw error table");
    IceModel out = model;
    out.params.w = w;
    out.params.s = s;
    out.D = build_decision_table(model.E, model.clusters, w, s);
    return out;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["data"] = m.data;
    return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw DataError("corrupt matrix payload");
    return m;
}

inline std::vector<int> bits_from_matrix_row(const Matrix& m, std::size_t i) {
    std::vector<int> row(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) row[j] = m(i, j) != 0.0 ? 1 : 0;
    return row;
}

}  // namespace detail

// Model directory layout: manifest.json plus one model_NNN.json per pool
// entry. Reloading reproduces predictions bit-exactly.
inline void save_model(const IceModel& model, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["format"] = "ice-model-v1";
    nlohmann::json params;
    params["L"] = model.params.L;
    params["restart_p"] = model.params.restart_p;
    params["z"] = model.params.z;
    params["w"] = model.params.w;
    params["s"] = model.params.s;
    params["N"] = model.params.N;
    params["alpha"] = model.params.alpha;
    params["beta"] = model.params.beta;
    params["cv_folds"] = model.params.cv_folds;
    params["seed"] = model.params.seed;
    manifest["params"] = params;

    manifest["scaler"]["means"] = model.scaler.means;
    manifest["scaler"]["stds"] = model.scaler.stds;

    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : model.clusters.clusters) clusters.push_back(c);
    manifest["clusters"] = clusters;
    manifest["z"] = model.clusters.z;

    nlohmann::json decision = nlohmann::json::array();
    for (std::size_t i = 0; i < model.D.rows; ++i)
        decision.push_back(detail::bits_from_matrix_row(model.D, i));
    manifest["decision"] = decision;

    manifest["errors"] = detail::matrix_to_json(model.E);
    manifest["train_X"] = detail::matrix_to_json(model.train_X);
    manifest["train_Y"] = model.train_Y;

    nlohmann::json schema = nlohmann::json::array();
    for (const auto& c : model.schema) {
        nlohmann::json sc;
        sc["source"] = c.source;
        sc["onehot"] = c.onehot;
        sc["value"] = c.value;
        schema.push_back(sc);
    }
    manifest["schema"] = schema;
    manifest["pool_size"] = model.pool.size();

    {
        std::ofstream out(fs::path(dir) / "manifest.json");
        if (!out) throw DataError("cannot write model manifest in " + dir);
        out << manifest.dump(2) << "\n";
    }
    for (std::size_t j = 0; j < model.pool.size(); ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "model_%03zu.json", j);
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw DataError("cannot write model file in " + dir);
        out << model.pool[j].to_json().dump(2) << "\n";
    }
}

inline IceModel load_model(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw DataError("cannot open model manifest in " + dir);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        throw DataError(std::string("corrupt model manifest: ") + e.what());
    }

    IceModel model;
    const auto& params = manifest.at("params");
    model.params.L = params.at("L").get<std::size_t>();
    model.params.restart_p = params.at("restart_p").get<double>();
    model.params.z = params.at("z").get<double>();
    model.params.w = params.at("w").get<double>();
    model.params.s = params.at("s").get<double>();
    model.params.N = params.at("N").get<std::size_t>();
    model.params.alpha = params.at("alpha").get<double>();
    model.params.beta = params.at("beta").get<double>();
    model.params.cv_folds = params.at("cv_folds").get<int>();
    model.params.seed = params.at("seed").get<std::uint64_t>();

    model.scaler.means = manifest.at("scaler").at("means").get<std::vector<double>>();
    model.scaler.stds = manifest.at("scaler").at("stds").get<std::vector<double>>();

    for (const auto& c : manifest.at("clusters"))
        model.clusters.clusters.push_back(c.get<std::vector<std::size_t>>());
    model.clusters.L = model.clusters.clusters.size();
    model.clusters.z = manifest.at("z").get<double>();

    const auto& decision = manifest.at("decision");
    std::size_t q = decision.size();
    model.D = Matrix(q, model.clusters.L);
    for (std::size_t i = 0; i < q; ++i) {
        auto row = decision[i].get<std::vector<int>>();
        if (row.size() != model.clusters.L) throw DataError("corrupt decision table");
        for (std::size_t j = 0; j < row.size(); ++j) model.D(i, j) = row[j] ? 1.0 : 0.0;
    }

    model.E = detail::matrix_from_json(manifest.at("errors"));
    model.train_X = detail::matrix_from_json(manifest.at("train_X"));
    model.train_Y = manifest.at("train_Y").get<std::vector<int>>();

    for (const auto& sc : manifest.at("schema")) {
        EncodedColumn c;
        c.source = sc.at("source").get<std::string>();
        c.onehot = sc.at("onehot").get<bool>();
        c.value = sc.at("value").get<std::string>();
        model.schema.push_back(c);
    }

    std::size_t pool_size = manifest.at("pool_size").get<std::size_t>();
    for (std::size_t j = 0; j < pool_size; ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "model_%03zu.json", j);
        std::ifstream min(fs::path(dir) / name);
        if (!min) throw DataError("missing pool model file in " + dir);
        nlohmann::json mj;
        try {
            min >> mj;
        } catch (const std::exception& e) {
            throw DataError(std::string("corrupt pool model: ") + e.what());
        }
        model.pool.push_back(TrainedModel::from_json(mj));
    }
    if (model.pool.size() != model.clusters.L) throw DataError("pool/cluster size mismatch");
    return model;
}

}  // namespace ice

#endif
