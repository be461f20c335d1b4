#include "granndis/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "granndis/errors.hpp"
#include "granndis/rng.hpp"

namespace granndis {

Graph make_csr_direct(VertexId n, std::vector<EdgeIndex> offsets, std::vector<VertexId> cols,
                      bool undirected) {
    Graph g;
    g.num_vertices_ = n;
    g.row_offsets_ = std::move(offsets);
    g.col_indices_ = std::move(cols);
    g.undirected_ = undirected;
    return g;
}

Graph Graph::from_edges(const std::vector<std::pair<VertexId, VertexId>>& edges,
                        VertexId num_vertices, bool undirected) {
    if (num_vertices == 0) {
        throw InputError("graph must have at least one vertex");
    }
    for (const auto& [u, v] : edges) {
        if (u >= num_vertices || v >= num_vertices) {
            throw InputError("edge endpoint " + std::to_string(std::max(u, v)) +
                             " out of range for " + std::to_string(num_vertices) + " vertices");
        }
    }

    std::vector<EdgeIndex> deg(num_vertices + 1, 0);
    for (const auto& [u, v] : edges) {
        if (u == v) continue; // self loops dropped
        deg[u + 1]++;
        if (undirected) deg[v + 1]++;
    }
    std::vector<EdgeIndex> offsets(num_vertices + 1, 0);
    for (VertexId i = 0; i < num_vertices; ++i) offsets[i + 1] = offsets[i] + deg[i + 1];

    std::vector<VertexId> cols(offsets[num_vertices]);
    std::vector<EdgeIndex> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        if (u == v) continue;
        cols[cursor[u]++] = v;
        if (undirected) cols[cursor[v]++] = u;
    }

    // Sort and dedup each slice, then repack.
    std::vector<EdgeIndex> packed_offsets(num_vertices + 1, 0);
    EdgeIndex write = 0;
    for (VertexId v = 0; v < num_vertices; ++v) {
        auto begin = cols.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
        auto end = cols.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
        std::sort(begin, end);
        auto last = std::unique(begin, end);
        for (auto it = begin; it != last; ++it) cols[write++] = *it;
        packed_offsets[v + 1] = write;
    }
    cols.resize(write);
    return make_csr_direct(num_vertices, std::move(packed_offsets), std::move(cols), undirected);
}

GraphStats compute_stats(const Graph& g) {
    GraphStats s;
    s.avg_degree = g.num_vertices() == 0
                       ? 0.0
                       : static_cast<double>(g.num_edges()) / static_cast<double>(g.num_vertices());
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        VertexId d = g.degree(v);
        s.max_degree = std::max(s.max_degree, d);
        if (d == 0) s.num_isolated++;
    }
    return s;
}

namespace {

// Geometric skip to the next selected candidate: returns the number of
// rejected candidates before the next acceptance under probability p.
std::uint64_t geometric_skip(KeyedRng& rng, double p, double log1mp) {
    if (p >= 1.0) return 0;
    double u = rng.next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    double skip = std::floor(std::log(u) / log1mp);
    if (skip < 0.0) skip = 0.0;
    if (skip > 1e18) skip = 1e18;
    return static_cast<std::uint64_t>(skip);
}

// Walks the candidate range [start, limit) selecting each candidate with
// probability p; calls emit(v) for selected v. Stream keyed by (seed, u, tag).
template <typename Emit>
void sample_range(std::uint64_t seed, VertexId u, VertexId start, VertexId limit, double p,
                  std::uint64_t tag, Emit&& emit) {
    if (p <= 0.0 || start >= limit) return;
    KeyedRng rng(seed, u, tag);
    double log1mp = (p < 1.0) ? std::log1p(-p) : 0.0;
    std::uint64_t v = start;
    v += geometric_skip(rng, p, log1mp);
    while (v < limit) {
        emit(static_cast<VertexId>(v));
        v += 1 + geometric_skip(rng, p, log1mp);
    }
}

// Two-pass CSR assembly: `scan(emit)` must produce the same (u, v) pairs
// (u < v) on both invocations. Slices come out sorted without a sort pass:
// vertex w receives lower endpoints in ascending u order, then its own
// higher endpoints in ascending v order.
template <typename Scan>
Graph assemble_undirected(VertexId n, Scan&& scan) {
    std::vector<EdgeIndex> deg(n + 1, 0);
    scan([&](VertexId u, VertexId v) {
        deg[u + 1]++;
        deg[v + 1]++;
    });
    std::vector<EdgeIndex> offsets(n + 1, 0);
    for (VertexId i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + deg[i + 1];
    std::vector<VertexId> cols(offsets[n]);
    std::vector<EdgeIndex> cursor(offsets.begin(), offsets.end() - 1);
    scan([&](VertexId u, VertexId v) {
        cols[cursor[u]++] = v;
        cols[cursor[v]++] = u;
    });
    return make_csr_direct(n, std::move(offsets), std::move(cols), true);
}

} // namespace

Graph gen_random_graph(VertexId n, double avg_degree, std::uint64_t seed) {
    if (n == 0) throw InputError("gen_random_graph: n must be >= 1");
    if (avg_degree < 0.0) throw InputError("gen_random_graph: avg_degree must be >= 0");
    if (avg_degree >= static_cast<double>(n)) {
        throw InputError("gen_random_graph: avg_degree " + std::to_string(avg_degree) +
                         " >= n, simple graph impossible");
    }
    if (n == 1 || avg_degree == 0.0) {
        return make_csr_direct(n, std::vector<EdgeIndex>(n + 1, 0), {}, true);
    }
    double p = avg_degree / static_cast<double>(n - 1);
    if (p > 1.0) p = 1.0;
    auto scan = [&](auto&& emit) {
        for (VertexId u = 0; u + 1 < n; ++u) {
            sample_range(seed, u, u + 1, n, p, 0, [&](VertexId v) { emit(u, v); });
        }
    };
    return assemble_undirected(n, scan);
}

std::uint32_t planted_block_of(VertexId v, VertexId n, std::uint32_t parts) {
    // Contiguous blocks, block b = [floor(b*n/parts), floor((b+1)*n/parts)).
    return static_cast<std::uint32_t>(
        ((static_cast<std::uint64_t>(v) + 1) * parts - 1) / n);
}

namespace {
VertexId block_end(std::uint32_t block, VertexId n, std::uint32_t parts) {
    return static_cast<VertexId>((static_cast<std::uint64_t>(block) + 1) * n / parts);
}
} // namespace

Graph gen_planted_partition_graph(VertexId n, std::uint32_t parts, double p_in, double p_out,
                                  std::uint64_t seed) {
    if (n == 0) throw InputError("gen_planted_partition_graph: n must be >= 1");
    if (parts == 0 || parts > n) {
        throw InputError("gen_planted_partition_graph: parts must be in [1, n]");
    }
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
        throw InputError("gen_planted_partition_graph: probabilities must lie in [0, 1]");
    }
    auto scan = [&](auto&& emit) {
        for (VertexId u = 0; u + 1 < n; ++u) {
            VertexId be = block_end(planted_block_of(u, n, parts), n, parts);
            sample_range(seed, u, u + 1, be, p_in, 1, [&](VertexId v) { emit(u, v); });
            sample_range(seed, u, be, n, p_out, 2, [&](VertexId v) { emit(u, v); });
        }
    };
    return assemble_undirected(n, scan);
}

Graph load_edge_list(const std::string& path, bool undirected) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge list file: " + path);

    std::vector<std::pair<VertexId, VertexId>> edges;
    VertexId declared_n = 0;
    bool have_declared = false;
    VertexId max_id = 0;
    bool any_edge = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            if (hs >> word && word == "vertices") {
                unsigned long long n = 0;
                if (hs >> n && n > 0) {
                    declared_n = static_cast<VertexId>(n);
                    have_declared = true;
                }
            }
            continue;
        }
        std::istringstream ls(line);
        unsigned long long u = 0, v = 0;
        if (!(ls >> u >> v)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed edge line");
        }
        std::string rest;
        if (ls >> rest) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens");
        }
        if (u > std::numeric_limits<VertexId>::max() || v > std::numeric_limits<VertexId>::max()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": vertex id too large");
        }
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
        max_id = std::max({max_id, static_cast<VertexId>(u), static_cast<VertexId>(v)});
        any_edge = true;
    }
    VertexId n = have_declared ? declared_n : (any_edge ? max_id + 1 : 0);
    if (n == 0) throw ParseError(path + ": no vertices declared and no edges present");
    return Graph::from_edges(edges, n, undirected);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << "# vertices " << g.num_vertices() << "\n";
    for (VertexId u = 0; u < g.num_vertices(); ++u) {
        for (VertexId v : g.neighbors(u)) {
            // undirected graphs store both directions; write each pair once
            if (g.undirected() && v < u) continue;
            out << u << " " << v << "\n";
        }
    }
    if (!out) throw InputError("failed writing edge list: " + path);
}

} // namespace granndis
