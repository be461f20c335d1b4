#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "granndis/batch_plan.hpp"
#include "granndis/cost_model.hpp"
#include "granndis/extract.hpp"
#include "granndis/graph.hpp"
#include "granndis/partition.hpp"

namespace granndis {

enum class Strategy { FullGraphBaseline, SharedPreload, PreloadEas, Cobatch };

Strategy strategy_from_string(const std::string& name);
std::string strategy_name(Strategy s);

struct SimOptions {
    /// Time multiplier mirroring the backward pass onto forward compute and
    /// per-layer communication. Volumes are reported for the forward pass.
    double backward_factor = 2.0;
    /// Gradient synchronization is fully overlapped with compute by default.
    bool overlap_grad_sync = true;
};

struct WorkerCost {
    std::uint32_t server = 0;
    std::uint32_t gpu = 0;
    double compute_s = 0.0;
    double internal_s = 0.0;
    double external_s = 0.0;
    double sync_s = 0.0;
    std::uint64_t internal_moved = 0;   // per-layer vertex-vectors fetched intra-server
    std::uint64_t external_moved = 0;   // per-layer vertex-vectors fetched across servers
    std::uint64_t features_preloaded = 0; // halo input features replicated on this worker

    double total() const noexcept { return compute_s + internal_s + external_s + sync_s; }
};

/// Per-epoch cost. The epoch is synchronous, so total_s is the largest
/// per-worker component sum and the aggregate time columns are that worker's
/// components. Aggregate volumes are sums over workers.
struct CostBreakdown {
    Strategy strategy = Strategy::FullGraphBaseline;
    std::vector<WorkerCost> workers; // ordered by (server, gpu)
    double compute_s = 0.0;
    double internal_comm_s = 0.0;
    double external_comm_s = 0.0;
    double grad_sync_s = 0.0;
    double total_s = 0.0;
    std::uint64_t internal_vertices_moved = 0;
    std::uint64_t external_vertices_moved = 0;
    std::uint64_t features_preloaded = 0;
};

/// Simulates one steady-state training epoch.
///
/// Baseline: every layer, each GPU fetches the previous-layer vectors of the
/// remote vertices its own vertices depend on, once per (vertex, destination,
/// layer); intra-server fetches move at the internal rate, cross-server ones
/// at the external rate.
///
/// Preload strategies assign each server's subgraph (inner plus halo) across
/// its GPUs, recompute halo vertices locally, fetch only intra-server
/// dependencies per layer, and move no per-layer external traffic. Halo input
/// features are counted in features_preloaded; with a single resident batch
/// they are loaded once outside the steady epoch and cost no time.
///
/// Cobatch runs one plan per server (plans[s].worker_id == s); with more than
/// one batch per plan, each epoch reloads every batch share at the internal
/// rate.
CostBreakdown simulate_epoch(const Graph& g, const Partition& server_partition,
                             const Partition& gpu_partition, const ClusterSpec& cluster,
                             const ModelSpec& model, Strategy strategy,
                             const std::optional<SamplingConfig>& cfg = std::nullopt,
                             const std::vector<BatchPlan>* plans = nullptr,
                             const SimOptions& options = {});

struct StrategyResult {
    Strategy strategy;
    CostBreakdown breakdown;
    double speedup = 1.0; // total of the first strategy over this one
};

std::vector<StrategyResult> compare_strategies(
    const Graph& g, const Partition& server_partition, const Partition& gpu_partition,
    const ClusterSpec& cluster, const ModelSpec& model, const std::vector<Strategy>& strategies,
    const std::optional<SamplingConfig>& cfg = std::nullopt,
    const std::vector<BatchPlan>* plans = nullptr, const SimOptions& options = {});

struct VolumeAudit {
    bool ok = true;
    std::string detail;
};

/// Recounts moved vertices with an independent edge scan and compares them to
/// the breakdown, exactly.
VolumeAudit volume_audit(const CostBreakdown& breakdown, const Graph& g,
                         const Partition& server_partition, const Partition& gpu_partition,
                         const ModelSpec& model, Strategy strategy,
                         const std::optional<SamplingConfig>& cfg = std::nullopt,
                         const std::vector<BatchPlan>* plans = nullptr);

/// CSV rows: strategy,server,gpu,compute_s,internal_s,external_s,sync_s,total_s
/// one per GPU ordered by (server, gpu), then an ALL aggregate row.
void write_breakdown_csv(std::ostream& out, const CostBreakdown& breakdown,
                         bool header = true);

} // namespace granndis
