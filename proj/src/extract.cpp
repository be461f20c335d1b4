#include "granndis/extract.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include "granndis/errors.hpp"
#include "granndis/rng.hpp"

namespace granndis {

bool DependencySubgraph::is_inner(VertexId v) const {
    return std::binary_search(inner_vertices.begin(), inner_vertices.end(), v);
}

bool DependencySubgraph::is_halo(VertexId v) const {
    return std::binary_search(halo_vertices.begin(), halo_vertices.end(), v);
}

std::uint32_t DependencySubgraph::hop_of(VertexId v) const {
    if (is_inner(v)) return 0;
    auto it = std::lower_bound(halo_vertices.begin(), halo_vertices.end(), v);
    if (it == halo_vertices.end() || *it != v) {
        throw InputError("hop_of: vertex " + std::to_string(v) + " not in subgraph");
    }
    return halo_hops[static_cast<std::size_t>(it - halo_vertices.begin())];
}

std::vector<VertexId> DependencySubgraph::all_vertices() const {
    std::vector<VertexId> out;
    out.reserve(inner_vertices.size() + halo_vertices.size());
    std::merge(inner_vertices.begin(), inner_vertices.end(), halo_vertices.begin(),
               halo_vertices.end(), std::back_inserter(out));
    return out;
}

namespace {

void check_server(const Graph& g, const Partition& p, std::uint32_t server_id) {
    if (p.assignment.size() != g.num_vertices()) {
        throw InputError("extract: partition size does not match graph");
    }
    if (server_id >= p.num_parts) {
        throw InputError("extract: server id " + std::to_string(server_id) + " out of range (" +
                         std::to_string(p.num_parts) + " parts)");
    }
}

EdgeIndex count_induced_edges(const Graph& g, const std::vector<char>& member,
                              const std::vector<VertexId>& vertices) {
    EdgeIndex count = 0;
    for (VertexId v : vertices) {
        for (VertexId u : g.neighbors(v)) {
            if (member[u]) ++count;
        }
    }
    return count;
}

DependencySubgraph finish_subgraph(const Graph& g, std::uint32_t server_id,
                                   std::vector<VertexId> inner,
                                   std::vector<std::pair<VertexId, std::uint32_t>> halo,
                                   std::uint32_t hop_limit, bool sampled) {
    std::sort(halo.begin(), halo.end());
    DependencySubgraph sub;
    sub.server_id = server_id;
    sub.inner_vertices = std::move(inner);
    sub.halo_vertices.reserve(halo.size());
    sub.halo_hops.reserve(halo.size());
    for (const auto& [v, h] : halo) {
        sub.halo_vertices.push_back(v);
        sub.halo_hops.push_back(h);
    }
    sub.hop_limit = hop_limit;
    sub.sampled = sampled;

    std::vector<char> member(g.num_vertices(), 0);
    for (VertexId v : sub.inner_vertices) member[v] = 1;
    for (VertexId v : sub.halo_vertices) member[v] = 1;
    std::vector<VertexId> all = sub.all_vertices();
    sub.induced_edges = count_induced_edges(g, member, all);
    return sub;
}

} // namespace

DependencySubgraph extract_full(const Graph& g, const Partition& server_partition,
                                std::uint32_t server_id, std::uint32_t layers) {
    check_server(g, server_partition, server_id);
    std::vector<VertexId> inner = server_partition.members(server_id);

    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(g.num_vertices(), kUnvisited);
    std::deque<VertexId> queue;
    for (VertexId v : inner) {
        dist[v] = 0;
        queue.push_back(v);
    }
    std::vector<std::pair<VertexId, std::uint32_t>> halo;
    while (!queue.empty()) {
        VertexId v = queue.front();
        queue.pop_front();
        if (dist[v] == layers) continue;
        for (VertexId u : g.neighbors(v)) {
            if (dist[u] != kUnvisited) continue;
            dist[u] = dist[v] + 1;
            halo.emplace_back(u, dist[u]);
            queue.push_back(u);
        }
    }
    return finish_subgraph(g, server_id, std::move(inner), std::move(halo), layers,
                           /*sampled=*/false);
}

namespace {

// First min(fanout, all) entries of the seeded permutation of v's external
// neighbor candidates. The permutation depends only on (seed, v), so the
// exposed prefix nests as fanout grows.
std::vector<VertexId> sampled_prefix(const Graph& g, const std::vector<char>& inner_mask,
                                     VertexId v, std::uint32_t fanout, std::uint64_t seed) {
    std::vector<VertexId> candidates;
    for (VertexId u : g.neighbors(v)) {
        if (!inner_mask[u]) candidates.push_back(u);
    }
    if (fanout == kUnlimitedFanout || candidates.size() <= fanout) return candidates;
    KeyedRng rng(seed, v, 0x73616d70ULL);
    keyed_shuffle(candidates, rng);
    candidates.resize(fanout);
    return candidates;
}

} // namespace

DependencySubgraph extract_sampled(const Graph& g, const Partition& server_partition,
                                   std::uint32_t server_id, const SamplingConfig& cfg,
                                   SampleTrace* trace) {
    check_server(g, server_partition, server_id);
    std::vector<VertexId> inner = server_partition.members(server_id);

    std::vector<char> inner_mask(g.num_vertices(), 0);
    for (VertexId v : inner) inner_mask[v] = 1;
    std::vector<char> included(inner_mask);

    // Hop-1 frontier is the inner boundary; afterwards the vertices added in
    // the previous hop.
    std::vector<VertexId> frontier;
    for (VertexId v : inner) {
        for (VertexId u : g.neighbors(v)) {
            if (!inner_mask[u]) {
                frontier.push_back(v);
                break;
            }
        }
    }

    std::vector<std::pair<VertexId, std::uint32_t>> halo;
    for (std::uint32_t hop = 1; hop <= cfg.max_hop && !frontier.empty(); ++hop) {
        std::vector<VertexId> added;
        for (VertexId v : frontier) {
            std::vector<VertexId> picks =
                sampled_prefix(g, inner_mask, v, cfg.fanout, cfg.seed);
            SampleTraceStep* step = nullptr;
            if (trace) {
                trace->push_back({v, hop, {}});
                step = &trace->back();
            }
            for (VertexId u : picks) {
                if (included[u]) continue;
                included[u] = 1;
                halo.emplace_back(u, hop);
                added.push_back(u);
                if (step) step->taken.push_back(u);
            }
        }
        std::sort(added.begin(), added.end());
        frontier = std::move(added);
    }
    // With unlimited fanout the result is the plain closure at depth max_hop.
    return finish_subgraph(g, server_id, std::move(inner), std::move(halo), cfg.max_hop,
                           /*sampled=*/!cfg.unlimited());
}

std::vector<std::pair<std::uint32_t, std::uint64_t>> neighbor_explosion_profile(
    const Graph& g, const Partition& server_partition, std::uint32_t server_id,
    std::uint32_t max_layers) {
    if (max_layers == 0) throw InputError("neighbor_explosion_profile: max_layers must be >= 1");
    check_server(g, server_partition, server_id);

    // Single BFS; closure size at L is the count of vertices at distance <= L.
    DependencySubgraph deep = extract_full(g, server_partition, server_id, max_layers);
    std::vector<std::uint64_t> added_at(max_layers + 1, 0);
    for (std::uint32_t h : deep.halo_hops) added_at[h]++;

    std::vector<std::pair<std::uint32_t, std::uint64_t>> profile;
    std::uint64_t size = deep.inner_vertices.size();
    for (std::uint32_t layer = 1; layer <= max_layers; ++layer) {
        size += added_at[layer];
        profile.emplace_back(layer, size);
    }
    return profile;
}

void save_subgraph_dump(const DependencySubgraph& sub, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << "inner:\n";
    for (VertexId v : sub.inner_vertices) out << v << "\n";
    out << "halo:\n";
    for (std::size_t i = 0; i < sub.halo_vertices.size(); ++i) {
        out << sub.halo_vertices[i] << " " << sub.halo_hops[i] << "\n";
    }
    if (!out) throw InputError("failed writing subgraph dump: " + path);
}

} // namespace granndis
