#include "granndis/batch_plan.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "granndis/errors.hpp"
#include "granndis/rng.hpp"

namespace granndis {

std::uint64_t estimate_batch_memory(const Batch& b, const ModelSpec& model) {
    std::uint64_t bytes = 0;
    for (std::size_t l = 0; l < b.mfg_vertices_per_layer.size(); ++l) {
        std::uint64_t width = (l == 0) ? model.feature_dim : model.hidden_dim;
        bytes += b.mfg_vertices_per_layer[l] * width * kBytesPerScalar;
    }
    return bytes;
}

namespace {

// Sampled closure of `targets` within the extracted subgraph: hop-by-hop
// growth from the target boundary, each frontier vertex exposing at most
// cfg.fanout candidates from its (seed, vertex)-keyed permutation.
// Candidates are subgraph members outside the target set.
std::vector<VertexId> batch_closure(const Graph& g, const std::vector<char>& universe,
                                    const std::vector<VertexId>& targets,
                                    const SamplingConfig& cfg) {
    std::vector<char> in_targets(g.num_vertices(), 0);
    for (VertexId v : targets) in_targets[v] = 1;
    std::vector<char> included = in_targets;

    std::vector<VertexId> frontier;
    for (VertexId v : targets) {
        for (VertexId u : g.neighbors(v)) {
            if (universe[u] && !in_targets[u]) {
                frontier.push_back(v);
                break;
            }
        }
    }

    std::vector<VertexId> closure = targets;
    for (std::uint32_t hop = 1; hop <= cfg.max_hop && !frontier.empty(); ++hop) {
        std::vector<VertexId> added;
        for (VertexId v : frontier) {
            std::vector<VertexId> candidates;
            for (VertexId u : g.neighbors(v)) {
                if (universe[u] && !in_targets[u]) candidates.push_back(u);
            }
            if (!(cfg.unlimited() || candidates.size() <= cfg.fanout)) {
                KeyedRng rng(cfg.seed, v, 0x73616d70ULL);
                keyed_shuffle(candidates, rng);
                candidates.resize(cfg.fanout);
            }
            for (VertexId u : candidates) {
                if (included[u]) continue;
                included[u] = 1;
                added.push_back(u);
            }
        }
        std::sort(added.begin(), added.end());
        closure.insert(closure.end(), added.begin(), added.end());
        frontier = std::move(added);
    }
    std::sort(closure.begin(), closure.end());
    return closure;
}

// Backward-from-targets peeling over the batch's induced adjacency:
// layer-L set is the targets; each step back unions in the in-batch
// neighbors of the current set.
std::vector<std::uint64_t> peel_mfg(const Graph& g, const std::vector<VertexId>& batch_vertices,
                                    const std::vector<VertexId>& targets, std::uint32_t layers) {
    std::vector<char> in_batch(g.num_vertices(), 0);
    for (VertexId v : batch_vertices) in_batch[v] = 1;

    std::vector<char> in_set(g.num_vertices(), 0);
    std::vector<VertexId> current = targets;
    for (VertexId v : current) in_set[v] = 1;

    std::vector<std::uint64_t> counts(layers + 1, 0);
    counts[layers] = current.size();
    std::vector<VertexId> frontier = current;
    for (std::uint32_t back = 1; back <= layers; ++back) {
        std::vector<VertexId> added;
        for (VertexId v : frontier) {
            for (VertexId u : g.neighbors(v)) {
                if (!in_batch[u] || in_set[u]) continue;
                in_set[u] = 1;
                added.push_back(u);
            }
        }
        current.insert(current.end(), added.begin(), added.end());
        counts[layers - back] = current.size();
        frontier = std::move(added);
    }
    return counts;
}

Batch make_batch(const Graph& g, const std::vector<char>& universe,
                 std::vector<VertexId> targets, std::uint32_t layers, const SamplingConfig& cfg,
                 const ModelSpec& model) {
    Batch b;
    b.target_vertices = std::move(targets);
    b.vertices = batch_closure(g, universe, b.target_vertices, cfg);
    b.mfg_vertices_per_layer = peel_mfg(g, b.vertices, b.target_vertices, layers);
    b.est_memory_bytes = estimate_batch_memory(b, model);
    return b;
}

std::vector<std::vector<VertexId>> split_targets_mincut(const Graph& g,
                                                        const std::vector<VertexId>& targets,
                                                        std::uint32_t r, std::uint64_t seed) {
    if (r <= 1 || targets.size() <= 1) return {targets};
    InducedSubgraph inner = induced_subgraph(g, targets);
    Partition p = partition_mincut(inner.graph, r, seed);
    std::vector<std::vector<VertexId>> groups(r);
    for (VertexId local = 0; local < inner.global_ids.size(); ++local) {
        groups[p.assignment[local]].push_back(inner.global_ids[local]);
    }
    for (auto& gvec : groups) std::sort(gvec.begin(), gvec.end());
    return groups;
}

BatchPlan build_cobatch(const DependencySubgraph& sub, const Graph& g, std::uint32_t layers,
                        const SamplingConfig& cfg, std::uint32_t r, const ModelSpec& model) {
    std::vector<char> universe(g.num_vertices(), 0);
    for (VertexId v : sub.inner_vertices) universe[v] = 1;
    for (VertexId v : sub.halo_vertices) universe[v] = 1;

    BatchPlan plan;
    plan.worker_id = sub.server_id;
    plan.strategy = BatchStrategy::FetchThenSplit;
    plan.layers = layers;
    for (auto& group : split_targets_mincut(g, sub.inner_vertices, r, cfg.seed)) {
        plan.batches.push_back(make_batch(g, universe, std::move(group), layers, cfg, model));
    }
    return plan;
}

} // namespace

BatchPlan plan_cobatch_fixed_r(const DependencySubgraph& sub, const Graph& g,
                               std::uint32_t layers, const SamplingConfig& cfg, std::uint32_t r,
                               const ModelSpec& model) {
    if (r == 0) throw InputError("plan_cobatch: batch count must be >= 1");
    std::uint32_t capped = std::min<std::uint32_t>(
        r, std::max<std::uint32_t>(1, static_cast<std::uint32_t>(sub.inner_vertices.size())));
    return build_cobatch(sub, g, layers, cfg, capped, model);
}

BatchPlan plan_cobatch(const DependencySubgraph& sub, const Graph& g, std::uint32_t layers,
                       const SamplingConfig& cfg, std::uint64_t mem_budget,
                       const ModelSpec& model) {
    if (mem_budget == 0) throw InputError("plan_cobatch: mem_budget must be > 0");
    std::uint32_t max_r =
        std::max<std::uint32_t>(1, static_cast<std::uint32_t>(sub.inner_vertices.size()));

    // Linear scan over R; max batch memory is not monotone in R under halo
    // effects, so each R is evaluated directly.
    BatchPlan plan;
    for (std::uint32_t r = 1; r <= max_r; ++r) {
        plan = build_cobatch(sub, g, layers, cfg, r, model);
        std::uint64_t worst = 0;
        for (const Batch& b : plan.batches) worst = std::max(worst, b.est_memory_bytes);
        if (worst <= mem_budget) return plan;
    }
    const Batch* worst_batch = nullptr;
    for (const Batch& b : plan.batches) {
        if (!worst_batch || b.est_memory_bytes > worst_batch->est_memory_bytes) worst_batch = &b;
    }
    throw CapacityError(
        "single-target batch for vertex " +
        std::to_string(worst_batch ? worst_batch->target_vertices.front() : 0) +
        " needs " + std::to_string(worst_batch ? worst_batch->est_memory_bytes : 0) +
        " bytes, budget is " + std::to_string(mem_budget));
}

namespace {

// GraphSAGE-style layered dependency sets: every vertex of the layer-l set
// keeps at most `fanout` neighbors, chosen by a (seed, vertex, layer)-keyed
// permutation of its full neighbor list.
Batch make_baseline_batch(const Graph& g, std::vector<VertexId> targets, std::uint32_t layers,
                          std::uint32_t fanout, std::uint64_t seed, const ModelSpec& model) {
    Batch b;
    b.target_vertices = std::move(targets);

    std::vector<char> in_set(g.num_vertices(), 0);
    std::vector<VertexId> current = b.target_vertices;
    for (VertexId v : current) in_set[v] = 1;

    b.mfg_vertices_per_layer.assign(layers + 1, 0);
    b.mfg_vertices_per_layer[layers] = current.size();
    for (std::uint32_t back = 1; back <= layers; ++back) {
        std::uint32_t layer = layers - back + 1; // sampling key for this transition
        std::vector<VertexId> added;
        for (VertexId v : current) {
            std::span<const VertexId> nb = g.neighbors(v);
            std::vector<VertexId> picks(nb.begin(), nb.end());
            if (fanout != kUnlimitedFanout && picks.size() > fanout) {
                KeyedRng rng(seed, v, layer);
                keyed_shuffle(picks, rng);
                picks.resize(fanout);
            }
            for (VertexId u : picks) {
                if (in_set[u]) continue;
                in_set[u] = 1;
                added.push_back(u);
            }
        }
        current.insert(current.end(), added.begin(), added.end());
        b.mfg_vertices_per_layer[layers - back] = current.size();
    }
    std::sort(current.begin(), current.end());
    b.vertices = std::move(current);
    b.est_memory_bytes = estimate_batch_memory(b, model);
    return b;
}

std::vector<std::vector<VertexId>> chunk_targets(const std::vector<VertexId>& targets,
                                                 std::uint32_t r) {
    std::vector<std::vector<VertexId>> chunks(r);
    std::size_t n = targets.size();
    std::size_t base = n / r, rem = n % r;
    std::size_t pos = 0;
    for (std::uint32_t i = 0; i < r; ++i) {
        std::size_t len = base + (i < rem ? 1 : 0);
        chunks[i].assign(targets.begin() + pos, targets.begin() + pos + len);
        pos += len;
    }
    return chunks;
}

} // namespace

BatchPlan plan_minibatch_baseline(const Graph& g, const Partition& gpu_partition,
                                  std::uint32_t gpu_id, std::uint32_t layers,
                                  std::uint32_t fanout_per_layer, std::uint64_t mem_budget,
                                  const ModelSpec& model, std::uint64_t seed) {
    if (mem_budget == 0) throw InputError("plan_minibatch_baseline: mem_budget must be > 0");
    if (gpu_id >= gpu_partition.num_parts) {
        throw InputError("plan_minibatch_baseline: gpu id out of range");
    }
    std::vector<VertexId> targets = gpu_partition.members(gpu_id);
    std::uint32_t max_r = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(targets.size()));

    BatchPlan plan;
    plan.worker_id = gpu_id;
    plan.strategy = BatchStrategy::SplitThenFetch;
    plan.layers = layers;
    for (std::uint32_t r = 1; r <= max_r; ++r) {
        plan.batches.clear();
        std::uint64_t worst = 0;
        for (auto& chunk : chunk_targets(targets, r)) {
            plan.batches.push_back(
                make_baseline_batch(g, std::move(chunk), layers, fanout_per_layer, seed, model));
            worst = std::max(worst, plan.batches.back().est_memory_bytes);
        }
        if (worst <= mem_budget) return plan;
    }
    const Batch* worst_batch = nullptr;
    for (const Batch& b : plan.batches) {
        if (!worst_batch || b.est_memory_bytes > worst_batch->est_memory_bytes) worst_batch = &b;
    }
    throw CapacityError(
        "single-target batch for vertex " +
        std::to_string(worst_batch ? worst_batch->target_vertices.front() : 0) +
        " needs " + std::to_string(worst_batch ? worst_batch->est_memory_bytes : 0) +
        " bytes, budget is " + std::to_string(mem_budget));
}

std::string plan_to_json(const BatchPlan& plan) {
    nlohmann::json j;
    j["worker_id"] = plan.worker_id;
    j["strategy"] =
        plan.strategy == BatchStrategy::FetchThenSplit ? "fetch_then_split" : "split_then_fetch";
    j["layers"] = plan.layers;
    j["batch_count"] = plan.batch_count();
    nlohmann::json batches = nlohmann::json::array();
    for (const Batch& b : plan.batches) {
        batches.push_back({
            {"targets", b.target_vertices.size()},
            {"vertices", b.vertices.size()},
            {"mfg_vertices_per_layer", b.mfg_vertices_per_layer},
            {"est_memory_bytes", b.est_memory_bytes},
        });
    }
    j["batches"] = std::move(batches);
    return j.dump(2);
}

void save_plan_json(const BatchPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << plan_to_json(plan) << "\n";
}

} // namespace granndis
