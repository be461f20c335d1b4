#include "granndis/sim.hpp"

#include <algorithm>
#include <cstdio>

#include "granndis/errors.hpp"

namespace granndis {

Strategy strategy_from_string(const std::string& name) {
    if (name == "full-graph") return Strategy::FullGraphBaseline;
    if (name == "preload") return Strategy::SharedPreload;
    if (name == "preload-eas") return Strategy::PreloadEas;
    if (name == "cobatch") return Strategy::Cobatch;
    throw InputError("unknown strategy: " + name);
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::FullGraphBaseline: return "full-graph";
        case Strategy::SharedPreload: return "preload";
        case Strategy::PreloadEas: return "preload-eas";
        case Strategy::Cobatch: return "cobatch";
    }
    throw InternalError("unreachable strategy value");
}

namespace {

void validate_inputs(const Graph& g, const Partition& sp, const Partition& gp,
                     const ClusterSpec& cluster) {
    validate(cluster);
    if (!g.undirected()) {
        throw InputError("simulate: requires an undirected (symmetric) graph");
    }
    if (sp.assignment.size() != g.num_vertices() || gp.assignment.size() != g.num_vertices()) {
        throw InputError("simulate: partition size does not match graph");
    }
    if (sp.num_parts != cluster.num_servers) {
        throw InputError("simulate: server partition has " + std::to_string(sp.num_parts) +
                         " parts, cluster has " + std::to_string(cluster.num_servers) +
                         " servers");
    }
    if (gp.num_parts != cluster.total_gpus()) {
        throw InputError("simulate: gpu partition has " + std::to_string(gp.num_parts) +
                         " parts, cluster has " + std::to_string(cluster.total_gpus()) + " GPUs");
    }
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        if (gp.assignment[v] / cluster.gpus_per_server != sp.assignment[v]) {
            throw InputError("simulate: gpu partition does not refine the server partition at "
                             "vertex " +
                             std::to_string(v));
        }
    }
}

std::vector<std::vector<VertexId>> members_by_part(const Partition& p) {
    std::vector<std::vector<VertexId>> out(p.num_parts);
    for (std::uint32_t part = 0; part < p.num_parts; ++part) {
        out[part].reserve(p.part_sizes[part]);
    }
    for (VertexId v = 0; v < p.assignment.size(); ++v) out[p.assignment[v]].push_back(v);
    return out;
}

double grad_sync_seconds(const ClusterSpec& cluster, const ModelSpec& model,
                         std::uint32_t updates_per_epoch, const SimOptions& options) {
    if (options.overlap_grad_sync) return 0.0;
    if (cluster.total_gpus() <= 1) return 0.0;
    // Weight gradients expressed in vertex-vector units of width hidden_dim.
    double units = static_cast<double>(model.feature_dim) +
                   static_cast<double>(model.layers - 1) * model.hidden_dim;
    double rate =
        cluster.num_servers > 1 ? cluster.external_bw_vps : cluster.internal_bw_vps;
    return static_cast<double>(updates_per_epoch) * units / rate;
}

// Splits one batch's vertices across the server's GPUs: inner vertices stay
// on their home GPU, halo vertices go to the least-loaded GPU in ascending id
// order (ties to the lowest GPU).
std::vector<std::vector<VertexId>> split_batch(const std::vector<VertexId>& batch_vertices,
                                               const Partition& sp, const Partition& gp,
                                               std::uint32_t server, std::uint32_t gpus) {
    std::vector<std::vector<VertexId>> shares(gpus);
    std::vector<VertexId> halo;
    for (VertexId v : batch_vertices) {
        if (sp.assignment[v] == server) {
            shares[gp.assignment[v] - server * gpus].push_back(v);
        } else {
            halo.push_back(v);
        }
    }
    for (VertexId v : halo) {
        std::uint32_t best = 0;
        for (std::uint32_t w = 1; w < gpus; ++w) {
            if (shares[w].size() < shares[best].size()) best = w;
        }
        shares[best].push_back(v);
    }
    for (auto& s : shares) std::sort(s.begin(), s.end());
    return shares;
}

struct PreloadBatches {
    // one entry per server: list of batches, each a sorted vertex set
    std::vector<std::vector<std::vector<VertexId>>> per_server;
    std::vector<std::uint32_t> updates_per_epoch; // R per server
    bool charge_load = false;
};

PreloadBatches preload_batches(const Graph& g, const Partition& sp, const ClusterSpec& cluster,
                               const ModelSpec& model, Strategy strategy,
                               const std::optional<SamplingConfig>& cfg,
                               const std::vector<BatchPlan>* plans) {
    PreloadBatches out;
    out.per_server.resize(cluster.num_servers);
    out.updates_per_epoch.assign(cluster.num_servers, 1);

    if (strategy == Strategy::Cobatch) {
        if (!plans || plans->size() != cluster.num_servers) {
            throw InputError("simulate: cobatch needs one batch plan per server");
        }
        for (std::uint32_t s = 0; s < cluster.num_servers; ++s) {
            const BatchPlan& plan = (*plans)[s];
            if (plan.worker_id != s || plan.strategy != BatchStrategy::FetchThenSplit) {
                throw InputError("simulate: plan " + std::to_string(s) +
                                 " does not belong to server " + std::to_string(s));
            }
            std::vector<VertexId> targets;
            for (const Batch& b : plan.batches) {
                targets.insert(targets.end(), b.target_vertices.begin(),
                               b.target_vertices.end());
                out.per_server[s].push_back(b.vertices);
            }
            std::sort(targets.begin(), targets.end());
            std::vector<VertexId> inner;
            for (VertexId v = 0; v < sp.assignment.size(); ++v) {
                if (sp.assignment[v] == s) inner.push_back(v);
            }
            if (targets != inner) {
                throw InputError("simulate: plan " + std::to_string(s) +
                                 " targets do not cover the server's vertices");
            }
            out.updates_per_epoch[s] = plan.batch_count();
            if (plan.batch_count() > 1) out.charge_load = true;
        }
        return out;
    }

    for (std::uint32_t s = 0; s < cluster.num_servers; ++s) {
        DependencySubgraph sub;
        if (strategy == Strategy::SharedPreload) {
            sub = extract_full(g, sp, s, model.layers);
        } else {
            if (!cfg) throw InputError("simulate: preload-eas needs a sampling config");
            sub = extract_sampled(g, sp, s, *cfg);
        }
        out.per_server[s].push_back(sub.all_vertices());
    }
    return out;
}

} // namespace

CostBreakdown simulate_epoch(const Graph& g, const Partition& sp, const Partition& gp,
                             const ClusterSpec& cluster, const ModelSpec& model,
                             Strategy strategy, const std::optional<SamplingConfig>& cfg,
                             const std::vector<BatchPlan>* plans, const SimOptions& options) {
    validate_inputs(g, sp, gp, cluster);
    validate(model);
    if (strategy != Strategy::Cobatch && plans) {
        throw InputError("simulate: batch plans are only valid with the cobatch strategy");
    }

    std::uint32_t ng = cluster.gpus_per_server;
    double bf = options.backward_factor;
    double layers = static_cast<double>(model.layers);

    CostBreakdown result;
    result.strategy = strategy;
    for (std::uint32_t s = 0; s < cluster.num_servers; ++s) {
        for (std::uint32_t w = 0; w < ng; ++w) {
            WorkerCost wc;
            wc.server = s;
            wc.gpu = w;
            result.workers.push_back(wc);
        }
    }
    auto worker = [&](std::uint32_t s, std::uint32_t w) -> WorkerCost& {
        return result.workers[std::size_t(s) * ng + w];
    };

    // stamp-based dedup over (scan, vertex)
    std::vector<std::uint32_t> seen(g.num_vertices(), 0);
    std::uint32_t stamp = 0;

    if (strategy == Strategy::FullGraphBaseline) {
        auto owned = members_by_part(gp);
        for (std::uint32_t part = 0; part < gp.num_parts; ++part) {
            std::uint32_t s = part / ng;
            WorkerCost& wc = worker(s, part % ng);
            wc.compute_s = static_cast<double>(owned[part].size()) * layers /
                           cluster.compute_vps * bf;
            ++stamp;
            std::uint64_t internal = 0, external = 0;
            for (VertexId v : owned[part]) {
                for (VertexId u : g.neighbors(v)) {
                    if (gp.assignment[u] == part || seen[u] == stamp) continue;
                    seen[u] = stamp;
                    if (sp.assignment[u] == s) {
                        ++internal;
                    } else {
                        ++external;
                    }
                }
            }
            wc.internal_moved = internal * model.layers;
            wc.external_moved = external * model.layers;
            wc.internal_s = static_cast<double>(wc.internal_moved) / cluster.internal_bw_vps * bf;
            wc.external_s = static_cast<double>(wc.external_moved) / cluster.external_bw_vps * bf;
            wc.sync_s = grad_sync_seconds(cluster, model, 1, options);
        }
    } else {
        PreloadBatches batches = preload_batches(g, sp, cluster, model, strategy, cfg, plans);
        std::vector<std::uint32_t> owner_in_batch(g.num_vertices(), 0);
        for (std::uint32_t s = 0; s < cluster.num_servers; ++s) {
            bool charge_load =
                strategy == Strategy::Cobatch && batches.updates_per_epoch[s] > 1;
            for (const auto& batch : batches.per_server[s]) {
                auto shares = split_batch(batch, sp, gp, s, ng);
                for (std::uint32_t w = 0; w < ng; ++w) {
                    for (VertexId v : shares[w]) owner_in_batch[v] = w;
                }
                std::vector<char> in_batch(g.num_vertices(), 0);
                for (VertexId v : batch) in_batch[v] = 1;

                for (std::uint32_t w = 0; w < ng; ++w) {
                    WorkerCost& wc = worker(s, w);
                    wc.compute_s += static_cast<double>(shares[w].size()) * layers /
                                    cluster.compute_vps * bf;
                    ++stamp;
                    std::uint64_t deps = 0;
                    std::uint64_t halo_share = 0;
                    for (VertexId v : shares[w]) {
                        if (sp.assignment[v] != s) ++halo_share;
                        for (VertexId u : g.neighbors(v)) {
                            if (!in_batch[u] || owner_in_batch[u] == w || seen[u] == stamp) {
                                continue;
                            }
                            seen[u] = stamp;
                            ++deps;
                        }
                    }
                    wc.internal_moved += deps * model.layers;
                    wc.internal_s += static_cast<double>(deps * model.layers) /
                                     cluster.internal_bw_vps * bf;
                    wc.features_preloaded += halo_share;
                    if (charge_load) {
                        wc.internal_s +=
                            static_cast<double>(shares[w].size()) / cluster.internal_bw_vps;
                    }
                }
            }
            double sync = grad_sync_seconds(cluster, model, batches.updates_per_epoch[s], options);
            for (std::uint32_t w = 0; w < ng; ++w) worker(s, w).sync_s = sync;
        }
    }

    // Aggregate row: the slowest worker's time columns, summed volumes.
    const WorkerCost* slowest = &result.workers.front();
    for (const WorkerCost& wc : result.workers) {
        if (wc.total() > slowest->total()) slowest = &wc;
        result.internal_vertices_moved += wc.internal_moved;
        result.external_vertices_moved += wc.external_moved;
        result.features_preloaded += wc.features_preloaded;
    }
    result.compute_s = slowest->compute_s;
    result.internal_comm_s = slowest->internal_s;
    result.external_comm_s = slowest->external_s;
    result.grad_sync_s = slowest->sync_s;
    result.total_s = slowest->total();
    return result;
}

std::vector<StrategyResult> compare_strategies(
    const Graph& g, const Partition& sp, const Partition& gp, const ClusterSpec& cluster,
    const ModelSpec& model, const std::vector<Strategy>& strategies,
    const std::optional<SamplingConfig>& cfg, const std::vector<BatchPlan>* plans,
    const SimOptions& options) {
    if (strategies.empty()) throw InputError("compare_strategies: no strategies given");
    std::vector<StrategyResult> results;
    for (Strategy s : strategies) {
        StrategyResult r;
        r.strategy = s;
        r.breakdown = simulate_epoch(g, sp, gp, cluster, model, s, cfg,
                                     s == Strategy::Cobatch ? plans : nullptr, options);
        results.push_back(std::move(r));
    }
    double baseline = results.front().breakdown.total_s;
    for (StrategyResult& r : results) {
        r.speedup = r.breakdown.total_s > 0.0 ? baseline / r.breakdown.total_s : 1.0;
    }
    return results;
}

namespace {

struct VolumeCounts {
    std::vector<std::uint64_t> internal_moved;
    std::vector<std::uint64_t> external_moved;
    std::vector<std::uint64_t> preloaded;
};

// Independent recount. Fetch volumes are counted from the dependency side:
// vertex u is fetched by worker w once per layer iff some vertex in w's share
// neighbors u. The simulator counts from the consumer side, so agreement is a
// real cross-check.
VolumeCounts recount_volumes(const Graph& g, const Partition& sp, const Partition& gp,
                             const ClusterSpec& cluster, const ModelSpec& model,
                             Strategy strategy, const std::optional<SamplingConfig>& cfg,
                             const std::vector<BatchPlan>* plans) {
    std::uint32_t ng = cluster.gpus_per_server;
    std::uint32_t workers = cluster.total_gpus();
    VolumeCounts counts;
    counts.internal_moved.assign(workers, 0);
    counts.external_moved.assign(workers, 0);
    counts.preloaded.assign(workers, 0);

    if (strategy == Strategy::FullGraphBaseline) {
        std::vector<char> sends_to(workers, 0);
        for (VertexId u = 0; u < g.num_vertices(); ++u) {
            std::fill(sends_to.begin(), sends_to.end(), 0);
            for (VertexId x : g.neighbors(u)) {
                if (gp.assignment[x] != gp.assignment[u]) sends_to[gp.assignment[x]] = 1;
            }
            for (std::uint32_t w = 0; w < workers; ++w) {
                if (!sends_to[w]) continue;
                if (sp.assignment[u] == w / ng) {
                    counts.internal_moved[w] += model.layers;
                } else {
                    counts.external_moved[w] += model.layers;
                }
            }
        }
        return counts;
    }

    PreloadBatches batches = preload_batches(g, sp, cluster, model, strategy, cfg, plans);
    std::vector<std::int64_t> owner(g.num_vertices(), -1);
    for (std::uint32_t s = 0; s < cluster.num_servers; ++s) {
        for (const auto& batch : batches.per_server[s]) {
            auto shares = split_batch(batch, sp, gp, s, ng);
            std::fill(owner.begin(), owner.end(), -1);
            for (std::uint32_t w = 0; w < ng; ++w) {
                for (VertexId v : shares[w]) owner[v] = w;
                for (VertexId v : shares[w]) {
                    if (sp.assignment[v] != s) counts.preloaded[std::size_t(s) * ng + w]++;
                }
            }
            std::vector<char> fetched_by(ng, 0);
            for (VertexId u : batch) {
                std::fill(fetched_by.begin(), fetched_by.end(), 0);
                for (VertexId x : g.neighbors(u)) {
                    if (owner[x] >= 0 && owner[x] != owner[u]) {
                        fetched_by[static_cast<std::size_t>(owner[x])] = 1;
                    }
                }
                for (std::uint32_t w = 0; w < ng; ++w) {
                    if (fetched_by[w]) {
                        counts.internal_moved[std::size_t(s) * ng + w] += model.layers;
                    }
                }
            }
        }
    }
    return counts;
}

} // namespace

VolumeAudit volume_audit(const CostBreakdown& breakdown, const Graph& g, const Partition& sp,
                         const Partition& gp, const ModelSpec& model, Strategy strategy,
                         const std::optional<SamplingConfig>& cfg,
                         const std::vector<BatchPlan>* plans) {
    std::uint32_t ng = gp.num_parts / std::max<std::uint32_t>(1, sp.num_parts);
    ClusterSpec cluster;
    cluster.num_servers = sp.num_parts;
    cluster.gpus_per_server = ng;

    VolumeCounts counts = recount_volumes(g, sp, gp, cluster, model, strategy, cfg, plans);

    VolumeAudit audit;
    auto fail = [&](const std::string& msg) {
        audit.ok = false;
        if (!audit.detail.empty()) audit.detail += "; ";
        audit.detail += msg;
    };
    if (breakdown.workers.size() != counts.internal_moved.size()) {
        fail("worker count mismatch");
        return audit;
    }
    std::uint64_t sum_int = 0, sum_ext = 0, sum_pre = 0;
    for (std::size_t w = 0; w < breakdown.workers.size(); ++w) {
        const WorkerCost& wc = breakdown.workers[w];
        if (wc.internal_moved != counts.internal_moved[w]) {
            fail("worker " + std::to_string(w) + " internal volume " +
                 std::to_string(wc.internal_moved) + " != recount " +
                 std::to_string(counts.internal_moved[w]));
        }
        if (wc.external_moved != counts.external_moved[w]) {
            fail("worker " + std::to_string(w) + " external volume " +
                 std::to_string(wc.external_moved) + " != recount " +
                 std::to_string(counts.external_moved[w]));
        }
        if (wc.features_preloaded != counts.preloaded[w]) {
            fail("worker " + std::to_string(w) + " preloaded " +
                 std::to_string(wc.features_preloaded) + " != recount " +
                 std::to_string(counts.preloaded[w]));
        }
        sum_int += counts.internal_moved[w];
        sum_ext += counts.external_moved[w];
        sum_pre += counts.preloaded[w];
    }
    if (breakdown.internal_vertices_moved != sum_int ||
        breakdown.external_vertices_moved != sum_ext ||
        breakdown.features_preloaded != sum_pre) {
        fail("aggregate volumes do not match per-worker sums");
    }
    return audit;
}

namespace {
std::string fmt_seconds(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}
} // namespace

void write_breakdown_csv(std::ostream& out, const CostBreakdown& breakdown, bool header) {
    if (header) {
        out << "strategy,server,gpu,compute_s,internal_s,external_s,sync_s,total_s\n";
    }
    std::string name = strategy_name(breakdown.strategy);
    for (const WorkerCost& wc : breakdown.workers) {
        out << name << "," << wc.server << "," << wc.gpu << "," << fmt_seconds(wc.compute_s)
            << "," << fmt_seconds(wc.internal_s) << "," << fmt_seconds(wc.external_s) << ","
            << fmt_seconds(wc.sync_s) << "," << fmt_seconds(wc.total()) << "\n";
    }
    out << name << ",ALL,ALL," << fmt_seconds(breakdown.compute_s) << ","
        << fmt_seconds(breakdown.internal_comm_s) << "," << fmt_seconds(breakdown.external_comm_s)
        << "," << fmt_seconds(breakdown.grad_sync_s) << "," << fmt_seconds(breakdown.total_s)
        << "\n";
}

} // namespace granndis
