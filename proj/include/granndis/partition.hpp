#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "granndis/graph.hpp"

namespace granndis {

inline constexpr double kDefaultBalanceEps = 0.05;
inline constexpr int kRefinementPassCap = 10;

struct Partition {
    std::vector<std::uint32_t> assignment; // vertex -> part id
    std::uint32_t num_parts = 0;
    std::vector<VertexId> part_sizes;

    std::uint32_t part_of(VertexId v) const { return assignment[v]; }
    std::vector<VertexId> members(std::uint32_t part) const;
};

struct CutReport {
    EdgeIndex edge_cut = 0;    // unordered vertex pairs with endpoints in different parts
    double cut_fraction = 0.0; // edge_cut / total unordered adjacent pairs
    double balance_ratio = 1.0; // max part size / ideal part size
};

enum class PartitionMode { Random, MinCut };

PartitionMode partition_mode_from_string(const std::string& name);

/// Uniform random balanced assignment, sizes within one vertex of each other.
Partition partition_random(const Graph& g, std::uint32_t parts, std::uint64_t seed);

/// Balanced min-cut heuristic: greedy region growing from high-degree seeds
/// (the frontier vertex with the most edges into the region joins next),
/// then boundary refinement passes that move a vertex to the neighboring
/// part with the largest positive connectivity gain. Ties break toward the
/// lowest vertex or part id. Max part size stays within
/// ceil(n/parts)*(1+epsilon).
Partition partition_mincut(const Graph& g, std::uint32_t parts, std::uint64_t seed,
                           double epsilon = kDefaultBalanceEps);

CutReport evaluate_cut(const Graph& g, const Partition& p);

struct HierarchicalPartition {
    Partition server; // parts = servers
    Partition gpu;    // parts = servers * gpus_per_server; gpu/gpus_per_server == server
    std::uint32_t gpus_per_server = 1;
};

/// Server split first, then an independent split of each server's induced
/// subgraph across its GPUs. GPU part of v is server*gpus_per_server + local.
HierarchicalPartition hierarchical_partition(const Graph& g, std::uint32_t servers,
                                             std::uint32_t gpus_per_server, PartitionMode mode,
                                             std::uint64_t seed,
                                             double epsilon = kDefaultBalanceEps);

/// Text format: line i is the part id of vertex i; optional first line "# parts K".
Partition load_partition(const std::string& path);
void save_partition(const Partition& p, const std::string& path);

/// Subgraph induced by a sorted vertex set, with local ids in the order of
/// `vertices` and a local->global id map.
struct InducedSubgraph {
    Graph graph;
    std::vector<VertexId> global_ids;
};
InducedSubgraph induced_subgraph(const Graph& g, std::span<const VertexId> vertices_sorted);

} // namespace granndis
