#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "granndis/extract.hpp"
#include "granndis/graph.hpp"

namespace granndis {

struct ClusterSpec {
    std::uint32_t num_servers = 1;
    std::uint32_t gpus_per_server = 1;
    double compute_vps = 1.0;        // vertices per second per GPU
    double internal_bw_vps = 1.0;    // per-GPU intra-server bandwidth, vertices per second
    double external_bw_vps = 1.0;    // per-GPU inter-server bandwidth, vertices per second
    std::uint64_t gpu_mem_bytes = 0; // 0 means unconstrained

    std::uint32_t total_gpus() const noexcept { return num_servers * gpus_per_server; }
};

struct ModelSpec {
    std::uint32_t layers = 1;
    std::uint32_t hidden_dim = 64;
    std::uint32_t feature_dim = 64;
    double expansion_factor = 1.5; // per-layer dependency growth rate
};

struct WorkloadSpec {
    std::uint64_t vertices = 1;
    std::uint64_t edges = 0; // directed adjacency entries

    double avg_degree() const noexcept {
        return static_cast<double>(edges) / static_cast<double>(vertices);
    }
};

WorkloadSpec workload_of(const Graph& g);

void validate(const ClusterSpec& c);
void validate(const ModelSpec& m);
void validate(const WorkloadSpec& w);

/// Epoch time of baseline full-graph training: per-layer vertex dependencies
/// are fetched from their owners, internal traffic at the fast intra-server
/// rate and external traffic at the slow inter-server rate.
double t_prev(const WorkloadSpec& w, const ClusterSpec& c);

/// Epoch time with server-level dependency preloading: no per-layer external
/// transfers; compute and internal traffic grow by the per-layer expansion
/// factor times the layer count.
double t_preload(const WorkloadSpec& w, const ClusterSpec& c, const ModelSpec& m);

/// Epoch time with boundary sampling, growth factor max_hop^alpha * fanout.
double t_sampling(const WorkloadSpec& w, const ClusterSpec& c, const SamplingConfig& cfg,
                  double alpha);

/// Minimum compute-to-external-bandwidth ratio at which preloading beats the
/// baseline: (expansion_factor * layers - 1) / avg_degree.
double speedup_threshold(double avg_degree, double expansion_factor, std::uint32_t layers);

/// Exponent alpha recovered from a measured growth rate: growth = degree^alpha.
double alpha_for(double avg_degree, double expansion_factor);

struct ValidityReport {
    double preload_growth = 0.0;            // expansion_factor * layers
    double cluster_parallelism = 0.0;       // num_servers * gpus_per_server
    bool growth_above_one = true;           // preload_growth > 1
    bool growth_within_cluster = true;      // preload_growth <= cluster_parallelism
    std::optional<double> sampling_growth;  // max_hop^alpha * fanout, when given
    std::optional<bool> sampling_above_one; // sampling_growth > 1
    std::optional<bool> sampling_below_preload; // sampling_growth < preload_growth
    std::vector<std::string> flags;

    bool ok() const {
        return growth_above_one && growth_within_cluster &&
               sampling_above_one.value_or(true) && sampling_below_preload.value_or(true);
    }
};

struct SamplingRange {
    SamplingConfig cfg;
    double alpha = 0.0;
};

/// Flags each violated operating-range condition with the offending quantity.
/// Reporting only; never throws for range violations.
ValidityReport check_validity(const WorkloadSpec& w, const ClusterSpec& c, const ModelSpec& m,
                              const std::optional<SamplingRange>& sampling = std::nullopt);

/// Smallest layer count (up to 1024) at which preloading becomes slower than
/// the baseline, or nullopt if it never does.
std::optional<std::uint32_t> crossover_layer(const WorkloadSpec& w, const ClusterSpec& c,
                                             double expansion_factor);

/// JSON file with keys num_servers, gpus_per_server, compute_vps,
/// internal_bw_vps, external_bw_vps, gpu_mem_bytes.
ClusterSpec load_cluster_spec(const std::string& path);
void save_cluster_spec(const ClusterSpec& c, const std::string& path);

} // namespace granndis
