#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "granndis/cost_model.hpp"
#include "granndis/extract.hpp"
#include "granndis/graph.hpp"
#include "granndis/partition.hpp"

namespace granndis {

inline constexpr std::uint64_t kUnlimitedMemory = std::numeric_limits<std::uint64_t>::max();
inline constexpr std::uint32_t kBytesPerScalar = 4;

enum class BatchStrategy { FetchThenSplit, SplitThenFetch };

struct Batch {
    std::vector<VertexId> target_vertices; // sorted
    std::vector<VertexId> vertices;        // sorted dependency universe (layer-0 set)
    std::vector<std::uint64_t> mfg_vertices_per_layer; // size layers+1; [0] inputs, [L] targets
    std::uint64_t est_memory_bytes = 0;
};

struct BatchPlan {
    std::uint32_t worker_id = 0; // server for fetch-then-split, GPU for the baseline
    BatchStrategy strategy = BatchStrategy::FetchThenSplit;
    std::uint32_t layers = 0;
    std::vector<Batch> batches;

    std::uint32_t batch_count() const noexcept {
        return static_cast<std::uint32_t>(batches.size());
    }
};

/// Activation plus input-feature bytes: sum over layers of the layer's MFG
/// vertex count times its width (feature_dim at layer 0, hidden_dim above)
/// times 4 bytes per scalar. Weights and optimizer state are excluded.
std::uint64_t estimate_batch_memory(const Batch& b, const ModelSpec& model);

/// Cooperative batch plan for one server: targets are the subgraph's inner
/// vertices, split by balanced min-cut over the inner-induced subgraph into
/// the smallest batch count R whose batches all fit the budget. Each batch's
/// dependency set is the sampled closure of its targets inside the already
/// extracted server subgraph, so batch-internal dependencies stay exact and
/// only the batch boundary is sampled.
BatchPlan plan_cobatch(const DependencySubgraph& sub, const Graph& g, std::uint32_t layers,
                       const SamplingConfig& cfg, std::uint64_t mem_budget,
                       const ModelSpec& model);

/// Build a cooperative plan with a caller-chosen batch count, skipping the
/// budget search.
BatchPlan plan_cobatch_fixed_r(const DependencySubgraph& sub, const Graph& g,
                               std::uint32_t layers, const SamplingConfig& cfg, std::uint32_t r,
                               const ModelSpec& model);

/// Per-GPU split-then-fetch baseline: the GPU's vertices are chunked, and
/// each chunk fetches its own dependencies from the whole graph with
/// layer-wise fanout sampling (at each layer every frontier vertex keeps at
/// most fanout_per_layer neighbors, permutation keyed by (seed, vertex,
/// layer)).
BatchPlan plan_minibatch_baseline(const Graph& g, const Partition& gpu_partition,
                                  std::uint32_t gpu_id, std::uint32_t layers,
                                  std::uint32_t fanout_per_layer, std::uint64_t mem_budget,
                                  const ModelSpec& model, std::uint64_t seed);

std::string plan_to_json(const BatchPlan& plan);
void save_plan_json(const BatchPlan& plan, const std::string& path);

} // namespace granndis
