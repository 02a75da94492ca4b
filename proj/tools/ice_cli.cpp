// Command-line front end: train, predict, bench, ablate, evidence, inspect,
// sweep. Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ice/ice.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string label_col = "label";
    std::string nominal = "onehot";
    std::string normalize = "per-fold";
    std::uint64_t seed = 42;
    std::string base = "logistic";
};

void add_ice_params(CLI::App* cmd, ice::IceParams& p) {
    cmd->add_option("--clusters", p.L, "Number of overlapping clusters L (default 100)");
    cmd->add_option("--restart-p", p.restart_p, "Random-walk restart probability (default 0.3)");
    cmd->add_option("--avg-cluster-size", p.z, "Target average partial-cluster size z (0 = Q/3)");
    cmd->add_option("--w", p.w, "Whole-model advantage score (default 0.4)");
    cmd->add_option("--s", p.s, "Local-model advantage score (default 0.5)");
    cmd->add_option("--neighbors", p.N, "Neighbor count N for model selection (default 5)");
    cmd->add_option("--alpha", p.alpha, "Partial/whole balance alpha (default 1)");
    cmd->add_option("--beta", p.beta, "Whole-weight-by-neighbors beta (default 1)");
    cmd->add_option("--cv-folds", p.cv_folds, "Inner CV folds for the prediction matrix (default 10)");
}

std::shared_ptr<const ice::Learner> make_base(const std::string& name) {
    if (name == "logistic") return std::make_shared<ice::LogisticLearner>();
    if (name == "stump") return std::make_shared<ice::StumpLearner>();
    throw ice::UsageError("unknown base learner: " + name);
}

ice::NominalMode nominal_mode(const std::string& s) {
    if (s == "drop") return ice::NominalMode::drop;
    if (s == "onehot") return ice::NominalMode::onehot;
    throw ice::UsageError("unknown nominal mode: " + s);
}

ice::NormalizeMode normalize_mode(const std::string& s) {
    if (s == "per-fold") return ice::NormalizeMode::per_fold;
    if (s == "global") return ice::NormalizeMode::global;
    throw ice::UsageError("unknown normalize mode: " + s);
}

json params_to_json(const ice::IceParams& p) {
    json j;
    j["L"] = p.L;
    j["restart_p"] = p.restart_p;
    j["z"] = p.z;
    j["w"] = p.w;
    j["s"] = p.s;
    j["N"] = p.N;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["cv_folds"] = p.cv_folds;
    j["seed"] = p.seed;
    return j;
}

std::vector<std::pair<std::string, std::string>> collect_datasets(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> out;  // (id, file)
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".csv")
                out.emplace_back(entry.path().stem().string(), entry.path().string());
        std::sort(out.begin(), out.end());
        if (out.empty()) throw ice::DataError("no .csv files in " + path);
    } else {
        out.emplace_back(fs::path(path).stem().string(), path);
    }
    return out;
}

void write_report_csv(const std::string& path, const std::vector<ice::EvalRow>& rows,
                      bool timing) {
    std::ofstream out(path);
    if (!out) throw ice::DataError("cannot write " + path);
    out << "dataset,method,fold,auc,mean_models,seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.auc);
        out << r.dataset << "," << r.method << "," << r.fold << "," << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", r.mean_models);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", timing ? r.seconds : 0.0);
        out << buf << "\n";
    }
}

// Wall-clock and run configuration live in the sidecar so the primary CSV is
// byte-reproducible per seed.
void write_meta(const std::string& csv_path, const json& config,
                const std::vector<ice::EvalRow>& rows) {
    json meta;
    meta["config"] = config;
    json timings = json::array();
    for (const auto& r : rows) {
        json t;
        t["dataset"] = r.dataset;
        t["method"] = r.method;
        t["fold"] = r.fold;
        t["seconds"] = r.seconds;
        timings.push_back(t);
    }
    meta["timings"] = timings;
    meta["generated_at"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    std::ofstream out(csv_path + ".meta.json");
    out << meta.dump(2) << "\n";
}

int cmd_train(const std::string& data, const CommonOpts& common, ice::IceParams params,
              const std::string& out_dir) {
    params.seed = common.seed;
    ice::RawTable raw = ice::load_csv(data, common.label_col);
    auto schema = ice::encoding_schema(raw, nominal_mode(common.nominal));
    ice::Dataset ds = ice::encode_with_schema(raw, schema);

    ice::IceModel model = ice::fit(ds, params, *make_base(common.base));
    model.schema = schema;
    ice::save_model(model, out_dir);

    json config;
    config["command"] = "train";
    config["data"] = data;
    config["label_col"] = common.label_col;
    config["nominal"] = common.nominal;
    config["base"] = common.base;
    config["params"] = params_to_json(model.params);
    std::ofstream cfg(fs::path(out_dir) / "run_config.json");
    cfg << config.dump(2) << "\n";

    std::cerr << "trained model with " << model.pool.size() << " pool entries on " << ds.Q()
              << " instances, written to " << out_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& model_dir, const std::string& data, const CommonOpts& common,
                const std::string& out_path) {
    ice::IceModel model = ice::load_model(model_dir);
    if (model.schema.empty()) throw ice::DataError("model has no feature schema; retrain via CLI");
    ice::RawTable raw = ice::load_csv_features(data, common.label_col);
    ice::Dataset ds = ice::encode_with_schema(raw, model.schema);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ice::DataError("cannot write " + out_path);
        out = &file;
    }
    *out << "index,probability,label,M,unique_models\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.Q(); ++i) {
        ice::PredictionContext ctx = ice::predict_instance(ds.X.row(i), model);
        std::snprintf(buf, sizeof(buf), "%.6f", ctx.final_prob);
        *out << i << "," << buf << "," << ice::hard_label(ctx.final_prob) << "," << ctx.M << ","
             << ctx.unique_models << "\n";
    }
    return 0;
}

ice::Dataset load_dataset(const std::string& file, const CommonOpts& common) {
    ice::RawTable raw = ice::load_csv(file, common.label_col);
    return ice::encode_nominal(raw, nominal_mode(common.nominal));
}

int cmd_bench(const std::string& data, const CommonOpts& common, ice::IceParams params,
              const std::string& methods_csv, int folds, const std::string& out_csv,
              const std::string& reference, bool timing) {
    params.seed = common.seed;
    std::vector<std::string> methods;
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) methods.push_back(tok);
    if (methods.empty()) throw ice::UsageError("no methods given");

    auto base = make_base(common.base);
    std::vector<ice::EvalRow> rows;
    for (const auto& [id, file] : collect_datasets(data)) {
        ice::Dataset ds = load_dataset(file, common);
        ice::CrossValOptions opt;
        opt.outer_folds = folds;
        opt.normalize = normalize_mode(common.normalize);
        opt.dataset_id = id;
        for (const auto& name : methods) {
            auto r = ice::cross_validate(ds, ice::method_from_string(name), params, *base, opt);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        std::cerr << id << ": done\n";
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ice::EvalRow& a, const ice::EvalRow& b) {
        if (a.dataset != b.dataset) return a.dataset < b.dataset;
        if (a.method != b.method) return a.method < b.method;
        return a.fold < b.fold;
    });
    write_report_csv(out_csv, rows, timing);

    json config;
    config["command"] = "bench";
    config["data"] = data;
    config["methods"] = methods;
    config["folds"] = folds;
    config["label_col"] = common.label_col;
    config["nominal"] = common.nominal;
    config["normalize"] = common.normalize;
    config["base"] = common.base;
    config["params"] = params_to_json(params);
    write_meta(out_csv, config, rows);

    auto agg = ice::aggregate_report(rows, reference);
    json aggj;
    for (const auto& [method, a] : agg) {
        json m;
        m["mean_auc"] = a.mean_auc;
        m["wins"] = a.wins;
        m["ties"] = a.ties;
        m["losses"] = a.losses;
        aggj[method] = m;
    }
    json aggregate;
    aggregate["reference"] = reference;
    aggregate["methods"] = aggj;
    std::ofstream aggout(out_csv + ".aggregate.json");
    aggout << aggregate.dump(2) << "\n";
    return 0;
}

int cmd_ablate(const std::string& data, const CommonOpts& common, ice::IceParams params,
               bool c1, bool c2, bool c3, int folds, const std::string& out_csv, bool timing) {
    params.seed = common.seed;
    auto base = make_base(common.base);
    ice::AblationFlags flags{c1, c2, c3};

    std::vector<ice::EvalRow> rows;
    for (const auto& [id, file] : collect_datasets(data)) {
        ice::Dataset ds = load_dataset(file, common);
        ice::CrossValOptions opt;
        opt.outer_folds = folds;
        opt.normalize = normalize_mode(common.normalize);
        opt.dataset_id = id;
        auto r = ice::ablate(ds, flags, params, *base, opt);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    write_report_csv(out_csv, rows, timing);

    json config;
    config["command"] = "ablate";
    config["data"] = data;
    config["randomize_c1"] = c1;
    config["randomize_c2"] = c2;
    config["randomize_c3"] = c3;
    config["folds"] = folds;
    config["base"] = common.base;
    config["params"] = params_to_json(params);
    write_meta(out_csv, config, rows);
    return 0;
}

int cmd_evidence(const std::string& data, const CommonOpts& common, const std::string& out_path) {
    // raw feature space: z-scoring can erase the spatial scale differences
    // k-means needs to recover subdomains
    ice::Dataset ds = load_dataset(data, common);
    ice::SubdomainReport rep = ice::subdomain_evidence(ds, *make_base(common.base), common.seed);

    json j;
    j["protocol"] = "k-means k=3; 5-fold CV within each test cluster; "
                    "5 size-matched training redraws per cell";
    j["seed"] = common.seed;
    const char* names[4] = {"a", "b", "c", "whole"};
    for (std::size_t t = 0; t < 3; ++t) {
        json row;
        row["test_cluster"] = names[t];
        row["size"] = rep.cluster_sizes[t];
        row["applicable"] = rep.applicable[t];
        for (std::size_t s = 0; s < 4; ++s) {
            row["auc"][names[s]] = rep.applicable[t] ? json(rep.aucs[t][s]) : json(nullptr);
            row["gain"][names[s]] = rep.applicable[t] ? json(rep.gains[t][s]) : json(nullptr);
        }
        j["cells"].push_back(row);
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    *out << j.dump(2) << "\n";
    return 0;
}

int cmd_inspect(const std::string& model_dir, const std::string& out_path) {
    ice::IceModel model = ice::load_model(model_dir);
    std::size_t q = model.D.rows;
    std::size_t l = model.D.cols;

    json j;
    j["instances"] = q;
    j["pool_size"] = model.pool.size();
    j["params"] = params_to_json(model.params);

    std::vector<std::size_t> sizes;
    for (const auto& c : model.clusters.clusters) sizes.push_back(c.size());
    j["cluster_sizes"] = sizes;

    std::vector<double> density(l, 0.0);
    for (std::size_t jj = 0; jj < l; ++jj) {
        double ones = 0.0;
        for (std::size_t i = 0; i < q; ++i) ones += model.D(i, jj);
        density[jj] = ones / static_cast<double>(q);
    }
    j["decision_column_density"] = density;

    // per-instance associated partial models (whole column excluded)
    std::map<std::size_t, std::size_t> histogram;
    for (std::size_t i = 0; i < q; ++i) {
        std::size_t count = 0;
        for (std::size_t jj = 0; jj + 1 < l; ++jj)
            if (model.D(i, jj) != 0.0) ++count;
        ++histogram[count];
    }
    json hist;
    for (const auto& [count, n] : histogram) hist[std::to_string(count)] = n;
    j["associated_models_histogram"] = hist;

    double mean_models = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        ice::PredictionContext ctx = ice::predict_normalized(model.train_X.row(i), model);
        mean_models += static_cast<double>(ctx.unique_models);
    }
    j["mean_models_per_prediction"] = mean_models / static_cast<double>(q);
    j["consistency_score"] = ice::consistency_score(model.train_X, model.D);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    *out << j.dump(2) << "\n";
    return 0;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw ice::UsageError("empty value grid");
    return out;
}

int cmd_sweep(const std::string& model_dir, const std::string& w_values,
              const std::string& s_values, const std::string& data, const CommonOpts& common,
              const std::string& out_path) {
    ice::IceModel model = ice::load_model(model_dir);
    std::vector<double> ws = parse_grid(w_values);
    std::vector<double> ss = parse_grid(s_values);

    std::optional<ice::Dataset> eval_ds;
    if (!data.empty()) {
        ice::RawTable raw = ice::load_csv(data, common.label_col);
        eval_ds = ice::encode_with_schema(raw, model.schema);
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    *out << "w,s,partial_ones,partial_density" << (eval_ds ? ",auc" : "") << "\n";
    for (double w : ws)
        for (double s : ss) {
            ice::IceModel swept = ice::resweep_decision(model, w, s);
            std::size_t ones = 0;
            for (std::size_t i = 0; i < swept.D.rows; ++i)
                for (std::size_t jj = 0; jj + 1 < swept.D.cols; ++jj)
                    if (swept.D(i, jj) != 0.0) ++ones;
            double denom = static_cast<double>(swept.D.rows * (swept.D.cols - 1));
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%g,%g,%zu,%.6f", w, s, ones, ones / denom);
            *out << buf;
            if (eval_ds) {
                std::vector<double> scores;
                for (std::size_t i = 0; i < eval_ds->Q(); ++i)
                    scores.push_back(ice::predict_instance(eval_ds->X.row(i), swept).final_prob);
                std::snprintf(buf, sizeof(buf), ",%.6f", ice::auc(scores, eval_ds->Y));
                *out << buf;
            }
            *out << "\n";
        }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Individualized classifier ensembles over fuzzy instance clusters"};
    app.require_subcommand(1);

    CommonOpts common;
    ice::IceParams params;
    std::string data, out, model_dir;
    std::string methods = "ice,bagging";
    std::string reference = "bagging";
    std::string w_values = "0.4", s_values = "0.5";
    int folds = 10;
    bool c1 = false, c2 = false, c3 = false, timing = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--label-col", common.label_col, "Label column name (default 'label')");
        cmd->add_option("--nominal", common.nominal, "Nominal handling: onehot|drop");
        cmd->add_option("--seed", common.seed, "RNG seed");
        cmd->add_option("--base", common.base, "Base learner: logistic|stump");
    };

    auto* train = app.add_subcommand("train", "Train a model from a CSV");
    train->add_option("--data", data, "Training CSV")->required();
    train->add_option("--out", out, "Output model directory")->required();
    add_common(train);
    add_ice_params(train, params);

    auto* predict = app.add_subcommand("predict", "Predict with a trained model");
    predict->add_option("--model", model_dir, "Model directory")->required();
    predict->add_option("--data", data, "CSV of instances to score")->required();
    predict->add_option("--out", out, "Output CSV (default stdout)");
    predict->add_option("--label-col", common.label_col, "Label column to ignore if present");

    auto* bench = app.add_subcommand("bench", "Cross-validated benchmark over CSV(s)");
    bench->add_option("--data", data, "CSV file or directory of CSVs")->required();
    bench->add_option("--methods", methods, "Comma list: ice,bagging,adaboost,base");
    bench->add_option("--folds", folds, "Outer CV folds (default 10)");
    bench->add_option("--out", out, "Report CSV path")->required();
    bench->add_option("--reference", reference, "Reference method for win/loss counts");
    bench->add_option("--normalize", common.normalize, "per-fold|global");
    bench->add_flag("--timing", timing, "Write measured wall-clock into the seconds column");
    add_common(bench);
    add_ice_params(bench, params);

    auto* ablate = app.add_subcommand("ablate", "Randomized-control run (alpha=beta=0)");
    ablate->add_option("--data", data, "CSV file or directory of CSVs")->required();
    ablate->add_flag("--c1", c1, "Randomize clustering (bootstrap bags)");
    ablate->add_flag("--c2", c2, "Randomize instance-model association (shuffle D rows)");
    ablate->add_flag("--c3", c3, "Randomize neighbor selection");
    ablate->add_option("--folds", folds, "Outer CV folds (default 10)");
    ablate->add_option("--out", out, "Report CSV path")->required();
    ablate->add_option("--normalize", common.normalize, "per-fold|global");
    ablate->add_flag("--timing", timing, "Write measured wall-clock into the seconds column");
    add_common(ablate);
    add_ice_params(ablate, params);

    auto* evidence = app.add_subcommand("evidence", "Subdomain cross-testing experiment");
    evidence->add_option("--data", data, "CSV file")->required();
    evidence->add_option("--out", out, "Output JSON (default stdout)");
    add_common(evidence);

    auto* inspect = app.add_subcommand("inspect", "Inspect a trained model");
    inspect->add_option("--model", model_dir, "Model directory")->required();
    inspect->add_option("--out", out, "Output JSON (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "Re-sweep advantage scores on a trained model");
    sweep->add_option("--model", model_dir, "Model directory")->required();
    sweep->add_option("--w-values", w_values, "Comma list of w values");
    sweep->add_option("--s-values", s_values, "Comma list of s values");
    sweep->add_option("--data", data, "Optional labeled CSV to score per (w,s)");
    sweep->add_option("--out", out, "Output CSV (default stdout)");
    sweep->add_option("--label-col", common.label_col, "Label column name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*train) return cmd_train(data, common, params, out);
        if (*predict) return cmd_predict(model_dir, data, common, out);
        if (*bench) return cmd_bench(data, common, params, methods, folds, out, reference, timing);
        if (*ablate) return cmd_ablate(data, common, params, c1, c2, c3, folds, out, timing);
        if (*evidence) return cmd_evidence(data, common, out);
        if (*inspect) return cmd_inspect(model_dir, out);
        if (*sweep) return cmd_sweep(model_dir, w_values, s_values, data, common, out);
    } catch (const ice::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ice::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
