#ifndef ICE_DATA_HPP_
#define ICE_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace ice {

enum class ColumnKind { numeric, nominal };

struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
};

// Raw benchmark table before preprocessing. Cells kept as strings; numeric
// parsing happens at encoding time.
struct RawTable {
    std::vector<RawColumn> columns;            // feature columns, label excluded
    std::vector<std::vector<std::string>> rows;  // feature cells, same order as columns
    std::vector<int> labels;                   // already mapped to {0,1}
    std::string label_column;
    std::string label_value0;  // raw value mapped to 0 (lexicographically first)
    std::string label_value1;
};

struct Dataset {
    Matrix X;                 // Q x R
    std::vector<int> Y;       // labels in {0,1}
    std::vector<std::string> feature_names;

    std::size_t Q() const { return X.rows; }
    std::size_t R() const { return X.cols; }
};

// One encoded output column: either a numeric passthrough or one one-hot
// indicator. Stored in model manifests so prediction-time CSVs can be
// encoded with the training schema.
struct EncodedColumn {
    std::string source;
    bool onehot = false;
    std::string value;  // nominal value for the indicator, empty for numeric
};

struct Scaler {
    std::vector<double> means;
    std::vector<double> stds;  // sample std, divisor Q-1
};

struct FoldAssignment {
    std::vector<int> fold_of;
    int k = 0;  // effective fold count (may be reduced from the request)
    std::uint64_t seed = 0;
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (...) {
        return false;
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos == s.size() && std::isfinite(out);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

inline RawTable load_csv(const std::string& path, const std::string& label_column,
                         const std::map<std::string, ColumnKind>& column_kinds = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty table: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.empty()) throw DataError("empty header: " + path);

    std::ptrdiff_t label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = static_cast<std::ptrdiff_t>(j);
    if (label_idx < 0) throw DataError("missing label column '" + label_column + "' in " + path);

    std::vector<std::vector<std::string>> cells_rows;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("ragged row at line " + std::to_string(line_no) + " in " + path);
        for (const auto& c : cells)
            if (c.empty())
                throw DataError("missing cell at line " + std::to_string(line_no) + " in " + path);
        raw_labels.push_back(cells[static_cast<std::size_t>(label_idx)]);
        cells.erase(cells.begin() + label_idx);
        cells_rows.push_back(std::move(cells));
    }
    if (cells_rows.empty()) throw DataError("empty table: " + path);

    std::set<std::string> label_values(raw_labels.begin(), raw_labels.end());
    if (label_values.size() != 2)
        throw DataError("non-binary label: column '" + label_column + "' has " +
                        std::to_string(label_values.size()) + " distinct values");

    RawTable table;
    table.label_column = label_column;
    table.label_value0 = *label_values.begin();
    table.label_value1 = *std::next(label_values.begin());
    for (const auto& v : raw_labels) table.labels.push_back(v == table.label_value1 ? 1 : 0);

    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<std::ptrdiff_t>(j) == label_idx) continue;
        RawColumn col;
        col.name = header[j];
        auto it = column_kinds.find(col.name);
        if (it != column_kinds.end()) {
            col.kind = it->second;
        } else {
            // inference: numeric iff every cell parses as a finite decimal
            col.kind = ColumnKind::numeric;
            std::size_t feat_idx = table.columns.size();
            for (const auto& row : cells_rows) {
                double tmp;
                if (!detail::parse_double(row[feat_idx], tmp)) {
                    col.kind = ColumnKind::nominal;
                    break;
                }
            }
        }
        table.columns.push_back(col);
    }
    table.rows = std::move(cells_rows);
    return table;
}

// Feature-only loader for prediction-time CSVs; the label column, when
// present, is ignored. Column kinds come from the consuming schema.
inline RawTable load_csv_features(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty table: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = detail::split_csv_line(line);

    std::ptrdiff_t label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = static_cast<std::ptrdiff_t>(j);

    RawTable table;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<std::ptrdiff_t>(j) != label_idx)
            table.columns.push_back({header[j], ColumnKind::numeric});

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("ragged row at line " + std::to_string(line_no) + " in " + path);
        if (label_idx >= 0) cells.erase(cells.begin() + label_idx);
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty()) throw DataError("empty table: " + path);
    return table;
}

enum class NominalMode { drop, onehot };

inline std::vector<EncodedColumn> encoding_schema(const RawTable& raw, NominalMode mode) {
    std::vector<EncodedColumn> schema;
    for (std::size_t j = 0; j < raw.columns.size(); ++j) {
        const RawColumn& col = raw.columns[j];
        if (col.kind == ColumnKind::numeric) {
            schema.push_back({col.name, false, ""});
        } else if (mode == NominalMode::onehot) {
            std::set<std::string> values;
            for (const auto& row : raw.rows) values.insert(row[j]);
            for (const auto& v : values) schema.push_back({col.name, true, v});
        }
        // drop mode: nominal columns omitted
    }
    if (schema.empty()) throw DataError("no features remain after nominal handling");
    return schema;
}

inline Dataset encode_with_schema(const RawTable& raw, const std::vector<EncodedColumn>& schema) {
    std::map<std::string, std::size_t> col_index;
    for (std::size_t j = 0; j < raw.columns.size(); ++j) col_index[raw.columns[j].name] = j;

    Dataset ds;
    ds.X = Matrix(raw.rows.size(), schema.size());
    ds.Y = raw.labels;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const EncodedColumn& ec = schema[c];
        auto it = col_index.find(ec.source);
        if (it == col_index.end()) throw DataError("missing feature column '" + ec.source + "'");
        std::size_t j = it->second;
        for (std::size_t i = 0; i < raw.rows.size(); ++i) {
            if (ec.onehot) {
                ds.X(i, c) = raw.rows[i][j] == ec.value ? 1.0 : 0.0;
            } else {
                double v;
                if (!detail::parse_double(raw.rows[i][j], v))
                    throw DataError("non-numeric cell '" + raw.rows[i][j] + "' in column '" +
                                    ec.source + "'");
                ds.X(i, c) = v;
            }
        }
        ds.feature_names.push_back(ec.onehot ? ec.source + "=" + ec.value : ec.source);
    }
    return ds;
}

inline Dataset encode_nominal(const RawTable& raw, NominalMode mode) {
    return encode_with_schema(raw, encoding_schema(raw, mode));
}

inline Scaler fit_scaler(const Matrix& X) {
    if (X.rows == 0) throw DataError("cannot fit scaler on empty matrix");
    Scaler sc;
    sc.means.assign(X.cols, 0.0);
    sc.stds.assign(X.cols, 0.0);
    for (std::size_t j = 0; j < X.cols; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) m += X(i, j);
        m /= static_cast<double>(X.rows);
        double ss = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) {
            double d = X(i, j) - m;
            ss += d * d;
        }
        sc.means[j] = m;
        sc.stds[j] = X.rows > 1 ? std::sqrt(ss / static_cast<double>(X.rows - 1)) : 0.0;
    }
    return sc;
}

inline void apply_scaler(const Scaler& sc, Matrix& X) {
    if (X.cols != sc.means.size()) throw DataError("scaler dimension mismatch");
    for (std::size_t j = 0; j < X.cols; ++j) {
        double m = sc.means[j], s = sc.stds[j];
        for (std::size_t i = 0; i < X.rows; ++i)
            X(i, j) = s > 0.0 ? (X(i, j) - m) / s : 0.0;  // constant columns -> all zeros
    }
}

inline std::vector<double> apply_scaler(const Scaler& sc, std::span<const double> x) {
    if (x.size() != sc.means.size()) throw DataError("scaler dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = sc.stds[j] > 0.0 ? (x[j] - sc.means[j]) / sc.stds[j] : 0.0;
    return out;
}

inline std::tuple<Scaler, Matrix, Matrix> zscore_fit_apply(const Matrix& train_X,
                                                           const Matrix& other_X) {
    if (other_X.rows > 0 && other_X.cols != train_X.cols)
        throw DataError("zscore dimension mismatch");
    Scaler sc = fit_scaler(train_X);
    Matrix tr = train_X, ot = other_X;
    apply_scaler(sc, tr);
    if (ot.rows > 0) apply_scaler(sc, ot);
    return {sc, std::move(tr), std::move(ot)};
}

// Per-class round-robin after a seeded shuffle. k is reduced to the smallest
// class size when full stratification is impossible; the reduction is
// reported in the returned k.
inline FoldAssignment stratified_folds(const std::vector<int>& Y, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("fold count must be >= 2");
    std::size_t q = Y.size();
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < q; ++i) by_class[Y[i] != 0 ? 1 : 0].push_back(i);

    std::size_t smallest = q;
    for (const auto& cls : by_class)
        if (!cls.empty()) smallest = std::min(smallest, cls.size());
    int k_eff = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), smallest));
    if (k_eff < 2) k_eff = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), q));
    if (k_eff < 2) throw DataError("too few instances for 2 folds");

    FoldAssignment fa;
    fa.fold_of.assign(q, 0);
    fa.k = k_eff;
    fa.seed = seed;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        Rng g(mix_seed(seed, static_cast<std::uint64_t>(c)));
        shuffle_det(idx, g);
        for (std::size_t pos = 0; pos < idx.size(); ++pos)
            fa.fold_of[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k_eff));
    }
    return fa;
}

}  // namespace ice

#endif
