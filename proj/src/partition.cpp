#include "granndis/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <fstream>
#include <numeric>
#include <sstream>

#include "granndis/errors.hpp"
#include "granndis/rng.hpp"

namespace granndis {

std::vector<VertexId> Partition::members(std::uint32_t part) const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < assignment.size(); ++v) {
        if (assignment[v] == part) out.push_back(v);
    }
    return out;
}

PartitionMode partition_mode_from_string(const std::string& name) {
    if (name == "random") return PartitionMode::Random;
    if (name == "mincut") return PartitionMode::MinCut;
    throw InputError("unknown partition mode: " + name);
}

namespace {

Partition finish(std::vector<std::uint32_t> assignment, std::uint32_t parts) {
    Partition p;
    p.assignment = std::move(assignment);
    p.num_parts = parts;
    p.part_sizes.assign(parts, 0);
    for (std::uint32_t id : p.assignment) p.part_sizes[id]++;
    return p;
}

void check_parts(const Graph& g, std::uint32_t parts) {
    if (parts == 0) throw InputError("partition: parts must be >= 1");
    if (parts > g.num_vertices()) {
        throw InputError("partition: parts (" + std::to_string(parts) + ") exceeds vertex count (" +
                         std::to_string(g.num_vertices()) + ")");
    }
}

} // namespace

Partition partition_random(const Graph& g, std::uint32_t parts, std::uint64_t seed) {
    check_parts(g, parts);
    VertexId n = g.num_vertices();
    std::vector<VertexId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    KeyedRng rng(seed, 0x7061727469ULL);
    keyed_shuffle(perm, rng);
    std::vector<std::uint32_t> assignment(n);
    for (VertexId i = 0; i < n; ++i) assignment[perm[i]] = i % parts;
    return finish(std::move(assignment), parts);
}

Partition partition_mincut(const Graph& g, std::uint32_t parts, std::uint64_t seed,
                           double epsilon) {
    check_parts(g, parts);
    if (epsilon < 0.0) throw InputError("partition: epsilon must be >= 0");
    (void)seed; // growth and refinement are fully deterministic

    VertexId n = g.num_vertices();
    std::uint32_t kUnassigned = parts;
    std::vector<std::uint32_t> assignment(n, kUnassigned);

    // Per-part target sizes: first (n mod parts) parts get one extra.
    VertexId base = n / parts;
    VertexId rem = n % parts;

    // Seed order: degree descending, id ascending.
    std::vector<VertexId> by_degree(n);
    std::iota(by_degree.begin(), by_degree.end(), 0);
    std::stable_sort(by_degree.begin(), by_degree.end(), [&](VertexId a, VertexId b) {
        return g.degree(a) > g.degree(b);
    });
    std::size_t seed_scan = 0;

    // Greedy region growing: the frontier vertex with the most edges into
    // the current region joins next (ties to the lowest id), so a sparse
    // boundary is only crossed once a dense region is exhausted.
    std::vector<VertexId> gain(n, 0);
    std::vector<VertexId> touched;
    for (std::uint32_t part = 0; part < parts; ++part) {
        VertexId target = base + (part < rem ? 1 : 0);
        VertexId taken = 0;
        // entries sort by (gain, then lowest id on ties); stale entries are
        // skipped by re-checking the current gain on pop
        std::priority_queue<std::pair<VertexId, VertexId>> frontier;
        auto push = [&](VertexId v) {
            frontier.push({gain[v], std::numeric_limits<VertexId>::max() - v});
        };
        while (taken < target) {
            VertexId v = n;
            while (!frontier.empty()) {
                auto [g_at_push, key] = frontier.top();
                VertexId cand = std::numeric_limits<VertexId>::max() - key;
                frontier.pop();
                if (assignment[cand] != kUnassigned || gain[cand] != g_at_push) continue;
                v = cand;
                break;
            }
            if (v == n) {
                while (assignment[by_degree[seed_scan]] != kUnassigned) ++seed_scan;
                v = by_degree[seed_scan];
            }
            assignment[v] = part;
            ++taken;
            for (VertexId u : g.neighbors(v)) {
                if (assignment[u] != kUnassigned) continue;
                if (gain[u] == 0) touched.push_back(u);
                gain[u]++;
                push(u);
            }
        }
        for (VertexId u : touched) gain[u] = 0;
        touched.clear();
    }

    Partition p = finish(std::move(assignment), parts);

    VertexId cap = static_cast<VertexId>(
        std::floor(static_cast<double>((n + parts - 1) / parts) * (1.0 + epsilon)));
    cap = std::max<VertexId>(cap, (n + parts - 1) / parts);

    // Boundary refinement: move a vertex to the adjacent part with the best
    // positive gain, respecting the size cap and never emptying a part.
    std::vector<EdgeIndex> conn(parts, 0);
    std::vector<std::uint32_t> touched_parts;
    for (int pass = 0; pass < kRefinementPassCap; ++pass) {
        bool moved = false;
        for (VertexId v = 0; v < n; ++v) {
            std::uint32_t own = p.assignment[v];
            if (p.part_sizes[own] <= 1) continue;
            touched_parts.clear();
            for (VertexId u : g.neighbors(v)) {
                std::uint32_t q = p.assignment[u];
                if (conn[q] == 0) touched_parts.push_back(q);
                conn[q]++;
            }
            std::uint32_t best = own;
            EdgeIndex own_conn = conn[own];
            EdgeIndex best_gain = 0;
            for (std::uint32_t q : touched_parts) {
                if (q == own || p.part_sizes[q] + 1 > cap) continue;
                if (conn[q] > own_conn && conn[q] - own_conn > best_gain) {
                    best_gain = conn[q] - own_conn;
                    best = q;
                } else if (conn[q] > own_conn && conn[q] - own_conn == best_gain && q < best) {
                    best = q;
                }
            }
            for (std::uint32_t q : touched_parts) conn[q] = 0;
            if (best != own) {
                p.assignment[v] = best;
                p.part_sizes[own]--;
                p.part_sizes[best]++;
                moved = true;
            }
        }
        if (!moved) break;
    }
    return p;
}

CutReport evaluate_cut(const Graph& g, const Partition& p) {
    if (p.assignment.size() != g.num_vertices()) {
        throw InputError("evaluate_cut: partition covers " + std::to_string(p.assignment.size()) +
                         " vertices, graph has " + std::to_string(g.num_vertices()));
    }
    EdgeIndex cut = 0;
    EdgeIndex pairs = 0;
    for (VertexId u = 0; u < g.num_vertices(); ++u) {
        for (VertexId v : g.neighbors(u)) {
            if (v > u) {
                ++pairs;
                if (p.assignment[u] != p.assignment[v]) ++cut;
            } else if (!g.undirected()) {
                // directed-only reverse entry: count the pair unless (u,v) also exists
                auto nb = g.neighbors(v);
                if (!std::binary_search(nb.begin(), nb.end(), u)) {
                    ++pairs;
                    if (p.assignment[u] != p.assignment[v]) ++cut;
                }
            }
        }
    }
    CutReport r;
    r.edge_cut = cut;
    r.cut_fraction = pairs == 0 ? 0.0 : static_cast<double>(cut) / static_cast<double>(pairs);
    VertexId max_size = 0;
    for (VertexId s : p.part_sizes) max_size = std::max(max_size, s);
    double ideal = static_cast<double>(g.num_vertices()) / static_cast<double>(p.num_parts);
    r.balance_ratio = ideal == 0.0 ? 1.0 : static_cast<double>(max_size) / ideal;
    return r;
}

InducedSubgraph induced_subgraph(const Graph& g, std::span<const VertexId> vertices_sorted) {
    InducedSubgraph out;
    out.global_ids.assign(vertices_sorted.begin(), vertices_sorted.end());
    std::vector<std::pair<VertexId, VertexId>> edges;
    // local index lookup via binary search over the sorted id list
    auto local_of = [&](VertexId global) -> std::int64_t {
        auto it = std::lower_bound(out.global_ids.begin(), out.global_ids.end(), global);
        if (it == out.global_ids.end() || *it != global) return -1;
        return it - out.global_ids.begin();
    };
    for (std::size_t i = 0; i < out.global_ids.size(); ++i) {
        for (VertexId u : g.neighbors(out.global_ids[i])) {
            if (u <= out.global_ids[i]) continue;
            std::int64_t j = local_of(u);
            if (j >= 0) edges.emplace_back(static_cast<VertexId>(i), static_cast<VertexId>(j));
        }
    }
    out.graph = Graph::from_edges(edges, static_cast<VertexId>(out.global_ids.size()),
                                  /*undirected=*/true);
    return out;
}

HierarchicalPartition hierarchical_partition(const Graph& g, std::uint32_t servers,
                                             std::uint32_t gpus_per_server, PartitionMode mode,
                                             std::uint64_t seed, double epsilon) {
    if (servers == 0 || gpus_per_server == 0) {
        throw InputError("hierarchical_partition: servers and gpus_per_server must be >= 1");
    }
    if (static_cast<std::uint64_t>(servers) * gpus_per_server > g.num_vertices()) {
        throw InputError("hierarchical_partition: more workers than vertices");
    }
    auto run = [&](const Graph& graph, std::uint32_t parts, std::uint64_t s) {
        return mode == PartitionMode::Random ? partition_random(graph, parts, s)
                                             : partition_mincut(graph, parts, s, epsilon);
    };

    HierarchicalPartition h;
    h.gpus_per_server = gpus_per_server;
    h.server = run(g, servers, seed);

    std::vector<std::uint32_t> gpu_assignment(g.num_vertices(), 0);
    for (std::uint32_t s = 0; s < servers; ++s) {
        std::vector<VertexId> inner = h.server.members(s);
        InducedSubgraph sub = induced_subgraph(g, inner);
        Partition local = run(sub.graph, gpus_per_server, mix64(seed ^ (s + 1)));
        for (VertexId i = 0; i < sub.global_ids.size(); ++i) {
            gpu_assignment[sub.global_ids[i]] = s * gpus_per_server + local.assignment[i];
        }
    }
    h.gpu = Partition{};
    h.gpu.assignment = std::move(gpu_assignment);
    h.gpu.num_parts = servers * gpus_per_server;
    h.gpu.part_sizes.assign(h.gpu.num_parts, 0);
    for (std::uint32_t id : h.gpu.assignment) h.gpu.part_sizes[id]++;
    return h;
}

Partition load_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open partition file: " + path);
    std::vector<std::uint32_t> assignment;
    std::uint32_t declared_parts = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            unsigned long long k = 0;
            if (hs >> word >> k && word == "parts") declared_parts = static_cast<std::uint32_t>(k);
            continue;
        }
        std::istringstream ls(line);
        unsigned long long id = 0;
        if (!(ls >> id)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed part id");
        }
        assignment.push_back(static_cast<std::uint32_t>(id));
    }
    if (assignment.empty()) throw ParseError(path + ": empty partition file");
    std::uint32_t max_id = *std::max_element(assignment.begin(), assignment.end());
    std::uint32_t parts = std::max(declared_parts, max_id + 1);
    return [&] {
        Partition p;
        p.assignment = std::move(assignment);
        p.num_parts = parts;
        p.part_sizes.assign(parts, 0);
        for (std::uint32_t id : p.assignment) p.part_sizes[id]++;
        return p;
    }();
}

void save_partition(const Partition& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << "# parts " << p.num_parts << "\n";
    for (std::uint32_t id : p.assignment) out << id << "\n";
    if (!out) throw InputError("failed writing partition: " + path);
}

} // namespace granndis
