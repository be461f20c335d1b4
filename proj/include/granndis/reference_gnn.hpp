#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "granndis/extract.hpp"
#include "granndis/graph.hpp"
#include "granndis/partition.hpp"

namespace granndis {

struct Matrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> data; // row-major

    Matrix() = default;
    Matrix(std::uint32_t r, std::uint32_t c) : rows(r), cols(c), data(std::size_t(r) * c, 0.0) {}

    double& at(std::uint32_t r, std::uint32_t c) { return data[std::size_t(r) * cols + c]; }
    double at(std::uint32_t r, std::uint32_t c) const { return data[std::size_t(r) * cols + c]; }
    std::span<double> row(std::uint32_t r) { return {data.data() + std::size_t(r) * cols, cols}; }
    std::span<const double> row(std::uint32_t r) const {
        return {data.data() + std::size_t(r) * cols, cols};
    }
};

using DenseFeatures = Matrix;

/// Per-layer weight matrices, hidden x in-width, chained so layer 1 consumes
/// feature_dim and later layers consume hidden_dim.
struct LayerWeights {
    std::vector<Matrix> layers;
};

DenseFeatures make_features(VertexId n, std::uint32_t dim, std::uint64_t seed);
LayerWeights make_layer_weights(std::uint32_t num_layers, std::uint32_t feature_dim,
                                std::uint32_t hidden_dim, std::uint64_t seed);

/// Deterministic sum-aggregate / affine / ReLU forward pass:
/// h^l(v) = relu(W^l * (h^{l-1}(v) + sum of h^{l-1}(u) over neighbors u,
/// ascending id)). The fixed accumulation order makes outputs bit-stable.
/// layers = 0 returns the input unchanged.
DenseFeatures forward_full(const Graph& g, const DenseFeatures& x, const LayerWeights& w,
                           std::uint32_t layers);

/// Same computation using only the subgraph's vertices; at layer l only
/// vertices with hop <= layers - l are produced, and rows are returned for
/// inner vertices in ascending-id order. With require_exact the subgraph must
/// be an unsampled closure of depth >= layers.
DenseFeatures forward_server_local(const DependencySubgraph& sub, const Graph& g,
                                   const DenseFeatures& x, const LayerWeights& w,
                                   std::uint32_t layers, bool require_exact = false);

struct EquivalenceReport {
    std::vector<double> per_server_max_dev;
    double max_deviation = 0.0;
};

/// For every server: extract the full closure, run the server-local pass, and
/// compare against the whole-graph pass on inner vertices. Zero deviation is
/// expected for unsampled extraction.
EquivalenceReport equivalence_check(const Graph& g, const Partition& server_partition,
                                    std::uint32_t layers, std::uint64_t seed,
                                    std::uint32_t feature_dim = 8, std::uint32_t hidden_dim = 8);

} // namespace granndis
