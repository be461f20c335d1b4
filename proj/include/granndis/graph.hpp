#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace granndis {

using VertexId = std::uint32_t;
using EdgeIndex = std::uint64_t;

/// Immutable CSR graph. Neighbor slices are sorted ascending and
/// deduplicated; self loops are dropped at build time. Row v lists the
/// vertices v's aggregation depends on; in undirected mode the adjacency
/// is symmetric. num_edges() counts directed adjacency entries, so an
/// undirected edge contributes two.
///
/// Safe to share across threads once constructed.
class Graph {
public:
    Graph() = default;

    static Graph from_edges(const std::vector<std::pair<VertexId, VertexId>>& edges,
                            VertexId num_vertices, bool undirected);

    VertexId num_vertices() const noexcept { return num_vertices_; }
    EdgeIndex num_edges() const noexcept { return static_cast<EdgeIndex>(col_indices_.size()); }
    bool undirected() const noexcept { return undirected_; }

    std::span<const VertexId> neighbors(VertexId v) const {
        return {col_indices_.data() + row_offsets_[v],
                col_indices_.data() + row_offsets_[v + 1]};
    }
    VertexId degree(VertexId v) const {
        return static_cast<VertexId>(row_offsets_[v + 1] - row_offsets_[v]);
    }

    const std::vector<EdgeIndex>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<VertexId>& col_indices() const noexcept { return col_indices_; }

    std::uint32_t feature_dim() const noexcept { return feature_dim_; }
    void set_feature_dim(std::uint32_t dim) noexcept { feature_dim_ = dim; }

    bool operator==(const Graph& other) const noexcept {
        return num_vertices_ == other.num_vertices_ && row_offsets_ == other.row_offsets_ &&
               col_indices_ == other.col_indices_;
    }

private:
    VertexId num_vertices_ = 0;
    std::vector<EdgeIndex> row_offsets_{0};
    std::vector<VertexId> col_indices_;
    bool undirected_ = true;
    std::uint32_t feature_dim_ = 0;

    friend Graph make_csr_direct(VertexId n, std::vector<EdgeIndex> offsets,
                                 std::vector<VertexId> cols, bool undirected);
};

struct GraphStats {
    double avg_degree = 0.0;   // num_edges / num_vertices, directed-entry convention
    VertexId max_degree = 0;
    VertexId num_isolated = 0;
};

GraphStats compute_stats(const Graph& g);

/// Undirected G(n, p) generator with p chosen so the expected average degree
/// (directed-entry convention) matches `avg_degree`. Per-vertex streams are
/// keyed by (seed, vertex), so the result does not depend on evaluation order.
Graph gen_random_graph(VertexId n, double avg_degree, std::uint64_t seed);

/// Undirected planted-partition graph: `parts` near-equal contiguous blocks,
/// within-block edge probability p_in, cross-block probability p_out.
Graph gen_planted_partition_graph(VertexId n, std::uint32_t parts, double p_in, double p_out,
                                  std::uint64_t seed);

/// Block id of vertex v under the contiguous block layout used by the
/// planted generator.
std::uint32_t planted_block_of(VertexId v, VertexId n, std::uint32_t parts);

/// Edge-list text file: one "u v" per line, '#' lines ignored, optional
/// header "# vertices N" (otherwise N = max id + 1).
Graph load_edge_list(const std::string& path, bool undirected = true);
void save_edge_list(const Graph& g, const std::string& path);

} // namespace granndis
