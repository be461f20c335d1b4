#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "granndis/graph.hpp"
#include "granndis/partition.hpp"

namespace granndis {

inline constexpr std::uint32_t kUnlimitedFanout = std::numeric_limits<std::uint32_t>::max();

struct SamplingConfig {
    std::uint32_t max_hop = 1;
    std::uint32_t fanout = 15;
    std::uint64_t seed = 0;

    bool unlimited() const noexcept { return fanout == kUnlimitedFanout; }
};

/// A server's preloaded dependency subgraph: the vertices it owns (inner)
/// plus replicated external vertices (halo) labeled with the hop at which
/// they entered the closure. induced_edges counts directed adjacency entries
/// of the original graph with both endpoints inside inner + halo.
struct DependencySubgraph {
    std::uint32_t server_id = 0;
    std::vector<VertexId> inner_vertices; // sorted
    std::vector<VertexId> halo_vertices;  // sorted, disjoint from inner
    std::vector<std::uint32_t> halo_hops; // parallel to halo_vertices, >= 1
    EdgeIndex induced_edges = 0;
    std::uint32_t hop_limit = 0; // extraction depth used
    bool sampled = false;

    bool is_inner(VertexId v) const;
    bool is_halo(VertexId v) const;
    bool contains(VertexId v) const { return is_inner(v) || is_halo(v); }
    /// 0 for inner vertices, hop for halo vertices; throws for outsiders.
    std::uint32_t hop_of(VertexId v) const;
    std::vector<VertexId> all_vertices() const; // sorted inner-plus-halo union
};

/// Full closure: halo is every external vertex within `layers` hops of the
/// inner set, hop labels are exact BFS distances from the inner set.
DependencySubgraph extract_full(const Graph& g, const Partition& server_partition,
                                std::uint32_t server_id, std::uint32_t layers);

struct SampleTraceStep {
    VertexId frontier_vertex;
    std::uint32_t hop;
    std::vector<VertexId> taken; // external neighbors newly added through this vertex
};
using SampleTrace = std::vector<SampleTraceStep>;

/// Boundary sampling: each vertex exposes only the first `fanout` entries of
/// a seeded permutation of its external neighbors (keyed by (seed, vertex)),
/// and the halo is everything within max_hop such edges of the inner
/// boundary. The exposed edge set is independent of traversal state, so
/// results nest: growing fanout or max_hop never removes a halo vertex.
/// Internal (inner-to-inner) dependencies are never sampled.
DependencySubgraph extract_sampled(const Graph& g, const Partition& server_partition,
                                   std::uint32_t server_id, const SamplingConfig& cfg,
                                   SampleTrace* trace = nullptr);

/// Closure sizes |inner + halo| for hop limits 1..max_layers.
std::vector<std::pair<std::uint32_t, std::uint64_t>> neighbor_explosion_profile(
    const Graph& g, const Partition& server_partition, std::uint32_t server_id,
    std::uint32_t max_layers);

/// Debug dump: "inner:" section with one vertex per line, then "halo:" with
/// "vertex hop" pairs. Ascending order.
void save_subgraph_dump(const DependencySubgraph& sub, const std::string& path);

} // namespace granndis
