#include "granndis/reference_gnn.hpp"

#include <algorithm>
#include <cmath>

#include "granndis/errors.hpp"
#include "granndis/rng.hpp"

namespace granndis {

DenseFeatures make_features(VertexId n, std::uint32_t dim, std::uint64_t seed) {
    Matrix m(n, dim);
    KeyedRng rng(seed, 0x66656174ULL);
    for (double& x : m.data) x = rng.uniform(-0.5, 0.5);
    return m;
}

LayerWeights make_layer_weights(std::uint32_t num_layers, std::uint32_t feature_dim,
                                std::uint32_t hidden_dim, std::uint64_t seed) {
    if (feature_dim == 0 || hidden_dim == 0) {
        throw InputError("make_layer_weights: dimensions must be >= 1");
    }
    LayerWeights w;
    KeyedRng rng(seed, 0x77656967ULL);
    for (std::uint32_t l = 0; l < num_layers; ++l) {
        std::uint32_t in_width = (l == 0) ? feature_dim : hidden_dim;
        Matrix m(hidden_dim, in_width);
        for (double& x : m.data) x = rng.uniform(-0.5, 0.5);
        w.layers.push_back(std::move(m));
    }
    return w;
}

namespace {

void check_shapes(const DenseFeatures& x, const LayerWeights& w, std::uint32_t layers) {
    if (layers == 0) return;
    if (w.layers.size() < layers) {
        throw InputError("forward: " + std::to_string(layers) + " layers requested, " +
                         std::to_string(w.layers.size()) + " weight matrices given");
    }
    std::uint32_t width = x.cols;
    for (std::uint32_t l = 0; l < layers; ++l) {
        if (w.layers[l].cols != width) {
            throw InputError("forward: layer " + std::to_string(l + 1) + " expects width " +
                             std::to_string(w.layers[l].cols) + ", got " + std::to_string(width));
        }
        width = w.layers[l].rows;
    }
}

// out = relu(W * agg)
void apply_layer(const Matrix& weight, std::span<const double> agg, std::span<double> out) {
    for (std::uint32_t r = 0; r < weight.rows; ++r) {
        double acc = 0.0;
        const double* wrow = weight.data.data() + std::size_t(r) * weight.cols;
        for (std::uint32_t c = 0; c < weight.cols; ++c) acc += wrow[c] * agg[c];
        out[r] = acc > 0.0 ? acc : 0.0;
    }
}

} // namespace

DenseFeatures forward_full(const Graph& g, const DenseFeatures& x, const LayerWeights& w,
                           std::uint32_t layers) {
    if (x.rows != g.num_vertices()) {
        throw InputError("forward_full: feature rows do not match vertex count");
    }
    check_shapes(x, w, layers);

    Matrix prev = x;
    std::vector<double> agg;
    for (std::uint32_t l = 0; l < layers; ++l) {
        const Matrix& weight = w.layers[l];
        Matrix next(g.num_vertices(), weight.rows);
        agg.assign(prev.cols, 0.0);
        for (VertexId v = 0; v < g.num_vertices(); ++v) {
            std::span<const double> own = prev.row(v);
            std::copy(own.begin(), own.end(), agg.begin());
            for (VertexId u : g.neighbors(v)) {
                std::span<const double> nb = prev.row(u);
                for (std::uint32_t c = 0; c < prev.cols; ++c) agg[c] += nb[c];
            }
            apply_layer(weight, agg, next.row(v));
        }
        prev = std::move(next);
    }
    return prev;
}

DenseFeatures forward_server_local(const DependencySubgraph& sub, const Graph& g,
                                   const DenseFeatures& x, const LayerWeights& w,
                                   std::uint32_t layers, bool require_exact) {
    if (x.rows != g.num_vertices()) {
        throw InputError("forward_server_local: feature rows do not match vertex count");
    }
    check_shapes(x, w, layers);
    if (require_exact && (sub.sampled || sub.hop_limit < layers)) {
        throw ContractError("forward_server_local: subgraph too shallow or sampled for exact " +
                            std::to_string(layers) + "-layer computation");
    }

    std::vector<VertexId> all = sub.all_vertices();
    VertexId local_n = static_cast<VertexId>(all.size());
    std::vector<std::uint32_t> hop(local_n, 0);
    for (VertexId i = 0; i < local_n; ++i) hop[i] = sub.hop_of(all[i]);

    // local index per global vertex; -1 for outsiders
    std::vector<std::int64_t> local_of(g.num_vertices(), -1);
    for (VertexId i = 0; i < local_n; ++i) local_of[all[i]] = i;

    Matrix prev(local_n, x.cols);
    for (VertexId i = 0; i < local_n; ++i) {
        std::span<const double> src = x.row(all[i]);
        std::copy(src.begin(), src.end(), prev.row(i).begin());
    }

    std::vector<double> agg;
    for (std::uint32_t l = 1; l <= layers; ++l) {
        const Matrix& weight = w.layers[l - 1];
        Matrix next(local_n, weight.rows);
        agg.assign(prev.cols, 0.0);
        // A vertex still carries valid layer-(l-1) state iff hop <= layers-(l-1).
        std::uint32_t need = layers - l;
        for (VertexId i = 0; i < local_n; ++i) {
            if (hop[i] > need) continue;
            std::span<const double> own = prev.row(i);
            std::copy(own.begin(), own.end(), agg.begin());
            for (VertexId u : g.neighbors(all[i])) {
                std::int64_t j = local_of[u];
                if (j < 0 || hop[j] > need + 1) continue; // dependency unavailable
                std::span<const double> nb = prev.row(static_cast<VertexId>(j));
                for (std::uint32_t c = 0; c < prev.cols; ++c) agg[c] += nb[c];
            }
            apply_layer(weight, agg, next.row(i));
        }
        prev = std::move(next);
    }

    DenseFeatures out(static_cast<VertexId>(sub.inner_vertices.size()), prev.cols);
    for (VertexId r = 0; r < sub.inner_vertices.size(); ++r) {
        std::int64_t j = local_of[sub.inner_vertices[r]];
        std::span<const double> src = prev.row(static_cast<VertexId>(j));
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

EquivalenceReport equivalence_check(const Graph& g, const Partition& server_partition,
                                    std::uint32_t layers, std::uint64_t seed,
                                    std::uint32_t feature_dim, std::uint32_t hidden_dim) {
    DenseFeatures x = make_features(g.num_vertices(), feature_dim, seed);
    LayerWeights w = make_layer_weights(layers, feature_dim, hidden_dim, mix64(seed + 1));
    DenseFeatures full = forward_full(g, x, w, layers);

    EquivalenceReport report;
    for (std::uint32_t s = 0; s < server_partition.num_parts; ++s) {
        DependencySubgraph sub = extract_full(g, server_partition, s, layers);
        DenseFeatures local = forward_server_local(sub, g, x, w, layers, /*require_exact=*/true);
        double max_dev = 0.0;
        for (VertexId r = 0; r < sub.inner_vertices.size(); ++r) {
            std::span<const double> a = local.row(r);
            std::span<const double> b = full.row(sub.inner_vertices[r]);
            for (std::uint32_t c = 0; c < local.cols; ++c) {
                max_dev = std::max(max_dev, std::abs(a[c] - b[c]));
            }
        }
        report.per_server_max_dev.push_back(max_dev);
        report.max_deviation = std::max(report.max_deviation, max_dev);
    }
    return report;
}

} // namespace granndis
