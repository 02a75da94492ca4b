#ifndef ICE_GRAPHCLUSTER_HPP_
#define ICE_GRAPHCLUSTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

#include "common.hpp"

namespace ice {

struct AffinityArtifacts {
    Matrix S;                                  // pairwise Euclidean distances
    std::vector<std::vector<std::size_t>> G;   // symmetrized KNN adjacency lists (sorted)
    Matrix W;                                  // row i = restart distribution seeded at i
    std::vector<std::size_t> T;                // cluster center indices
};

struct ClusterSet {
    std::vector<std::vector<std::size_t>> clusters;  // sorted index lists; last = whole set
    std::size_t L = 0;
    double z = 0.0;
};

inline std::size_t knn_neighbor_count(std::size_t q) {
    return static_cast<std::size_t>(std::ceil(std::log10(static_cast<double>(q))));
}

inline std::pair<Matrix, std::vector<std::vector<std::size_t>>> knn_graph(const Matrix& X) {
    std::size_t q = X.rows;
    if (q < 2) throw DataError("knn_graph needs at least 2 instances");

    Matrix S(q, q);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = i + 1; j < q; ++j) {
            double d = std::sqrt(squared_distance(X.row(i), X.row(j)));
            S(i, j) = d;
            S(j, i) = d;
        }

    std::size_t k = std::max<std::size_t>(1, knn_neighbor_count(q));
    std::vector<std::set<std::size_t>> adj(q);
    std::vector<std::size_t> order(q);
    for (std::size_t i = 0; i < q; ++i) {
        order.clear();
        for (std::size_t j = 0; j < q; ++j)
            if (j != i) order.push_back(j);
        // distance ascending, ties broken by lower index
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return S(i, a) < S(i, b); });
        for (std::size_t n = 0; n < std::min(k, order.size()); ++n) {
            adj[i].insert(order[n]);
            adj[order[n]].insert(i);  // union symmetrization
        }
    }

    std::vector<std::vector<std::size_t>> g(q);
    for (std::size_t i = 0; i < q; ++i) g[i].assign(adj[i].begin(), adj[i].end());
    return {std::move(S), std::move(g)};
}

// Row i of W solves w = (1-p) * P^T w + p * e_i with P the row-normalized
// transition matrix; power iteration from e_i.
inline Matrix rwr_affinity(const std::vector<std::vector<std::size_t>>& g, double p,
                           double tol = 1e-8, int max_iter = 200) {
    if (!(p > 0.0 && p <= 1.0)) throw UsageError("restart probability must be in (0,1]");
    std::size_t q = g.size();

    std::vector<std::vector<std::size_t>> adj = g;
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t v : adj[i])
            if (v >= q) throw UsageError("adjacency index out of range");
        if (adj[i].empty()) adj[i].push_back(i);  // isolated node -> self-loop
    }
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t v : adj[i])
            if (v != i && !std::binary_search(adj[v].begin(), adj[v].end(), i))
                throw UsageError("adjacency must be symmetric");

    Matrix W(q, q);
    std::vector<double> w(q), next(q);
    for (std::size_t seed_node = 0; seed_node < q; ++seed_node) {
        std::fill(w.begin(), w.end(), 0.0);
        w[seed_node] = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t u = 0; u < q; ++u) {
                if (w[u] == 0.0) continue;
                double share = (1.0 - p) * w[u] / static_cast<double>(adj[u].size());
                for (std::size_t v : adj[u]) next[v] += share;
            }
            next[seed_node] += p;
            double delta = 0.0;
            for (std::size_t v = 0; v < q; ++v) delta = std::max(delta, std::abs(next[v] - w[v]));
            w.swap(next);
            if (delta < tol) break;
        }
        for (std::size_t v = 0; v < q; ++v) W(seed_node, v) = w[v];
    }
    return W;
}

// t_1 maximizes the column sum of W (total incoming probability); each later
// center minimizes the summed symmetric affinity to the centers chosen so far.
inline std::vector<std::size_t> select_centers(const Matrix& W, std::size_t m) {
    std::size_t q = W.rows;
    if (m < 1 || m > q) throw UsageError("center count must be in [1, Q]");

    std::vector<std::size_t> centers;
    std::vector<bool> taken(q, false);

    std::size_t best = 0;
    double best_sum = -1.0;
    for (std::size_t v = 0; v < q; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < q; ++i) s += W(i, v);
        if (s > best_sum) {
            best_sum = s;
            best = v;
        }
    }
    centers.push_back(best);
    taken[best] = true;

    std::vector<double> affinity(q, 0.0);
    for (std::size_t v = 0; v < q; ++v) affinity[v] = W(best, v) + W(v, best);
    while (centers.size() < m) {
        std::size_t pick = q;
        double pick_aff = 0.0;
        for (std::size_t v = 0; v < q; ++v) {
            if (taken[v]) continue;
            if (pick == q || affinity[v] < pick_aff) {
                pick = v;
                pick_aff = affinity[v];
            }
        }
        centers.push_back(pick);
        taken[pick] = true;
        for (std::size_t v = 0; v < q; ++v) affinity[v] += W(pick, v) + W(v, pick);
    }
    return centers;
}

// Global cut: the top floor(m*z) entries over the center rows of W form the
// partial clusters; undersized clusters are padded from the center's row.
inline ClusterSet cut_clusters(const Matrix& W, const std::vector<std::size_t>& centers, double z,
                               std::size_t q, std::size_t min_size = 8) {
    if (centers.empty()) throw UsageError("cut_clusters needs at least one center");
    if (!(z >= 1.0 && z <= static_cast<double>(q))) throw UsageError("z must be in [1, Q]");
    std::size_t m = centers.size();

    struct Entry {
        double value;
        std::size_t row;  // center position in T order
        std::size_t col;
    };
    std::vector<Entry> entries;
    entries.reserve(m * q);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t v = 0; v < q; ++v) entries.push_back({W(centers[r], v), r, v});
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });

    std::size_t keep = std::min(entries.size(),
                                static_cast<std::size_t>(std::floor(static_cast<double>(m) * z)));
    std::vector<std::set<std::size_t>> members(m);
    for (std::size_t e = 0; e < keep; ++e) members[entries[e].row].insert(entries[e].col);
    for (std::size_t r = 0; r < m; ++r) members[r].insert(centers[r]);

    std::size_t target = std::min(min_size, q);
    for (std::size_t r = 0; r < m; ++r) {
        if (members[r].size() >= target) continue;
        std::vector<std::size_t> order(q);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return W(centers[r], a) > W(centers[r], b);
        });
        for (std::size_t v : order) {
            if (members[r].size() >= target) break;
            members[r].insert(v);
        }
    }

    ClusterSet cs;
    cs.z = z;
    cs.L = m + 1;
    for (std::size_t r = 0; r < m; ++r)
        cs.clusters.emplace_back(members[r].begin(), members[r].end());
    std::vector<std::size_t> whole(q);
    std::iota(whole.begin(), whole.end(), 0);
    cs.clusters.push_back(std::move(whole));
    return cs;
}

inline std::pair<ClusterSet, AffinityArtifacts> fuzzy_cluster(const Matrix& X, std::size_t L,
                                                              double p = 0.3, double z = 0.0,
                                                              double tol = 1e-8,
                                                              int max_iter = 200) {
    if (L < 2) throw UsageError("cluster count must be >= 2");
    std::size_t q = X.rows;
    if (z <= 0.0) z = static_cast<double>(q) / 3.0;
    z = std::clamp(z, 1.0, static_cast<double>(q));
    std::size_t m = std::min(L - 1, q);  // center count capped at Q

    AffinityArtifacts art;
    auto [s, g] = knn_graph(X);
    art.S = std::move(s);
    art.G = std::move(g);
    art.W = rwr_affinity(art.G, p, tol, max_iter);
    art.T = select_centers(art.W, m);
    ClusterSet cs = cut_clusters(art.W, art.T, z, q);
    return {std::move(cs), std::move(art)};
}

}  // namespace ice

#endif
