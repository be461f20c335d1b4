#include "granndis/cost_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "granndis/errors.hpp"

namespace granndis {

WorkloadSpec workload_of(const Graph& g) {
    return WorkloadSpec{g.num_vertices(), g.num_edges()};
}

void validate(const ClusterSpec& c) {
    if (c.num_servers == 0 || c.gpus_per_server == 0) {
        throw InputError("cluster: num_servers and gpus_per_server must be >= 1");
    }
    if (c.compute_vps <= 0.0 || c.internal_bw_vps <= 0.0 || c.external_bw_vps <= 0.0) {
        throw InputError("cluster: all rates must be > 0");
    }
}

void validate(const ModelSpec& m) {
    if (m.layers == 0) throw InputError("model: layers must be >= 1");
    if (m.hidden_dim == 0 || m.feature_dim == 0) {
        throw InputError("model: hidden_dim and feature_dim must be >= 1");
    }
    if (m.expansion_factor < 1.0) throw InputError("model: expansion_factor must be >= 1");
}

void validate(const WorkloadSpec& w) {
    if (w.vertices == 0) throw InputError("workload: vertices must be >= 1");
}

double t_prev(const WorkloadSpec& w, const ClusterSpec& c) {
    validate(w);
    validate(c);
    double ns = c.num_servers;
    double ng = c.gpus_per_server;
    double v = static_cast<double>(w.vertices);
    double e = static_cast<double>(w.edges);
    double compute = v / (ns * ng * c.compute_vps);
    double internal = (e / (ns * ng)) * ((ng - 1.0) / (ng * ns)) / c.internal_bw_vps;
    double external = (e / (ns * ng)) * (1.0 - 1.0 / ns) / c.external_bw_vps;
    return compute + internal + external;
}

double t_preload(const WorkloadSpec& w, const ClusterSpec& c, const ModelSpec& m) {
    validate(w);
    validate(c);
    validate(m);
    double ns = c.num_servers;
    double ng = c.gpus_per_server;
    double v = static_cast<double>(w.vertices);
    double e = static_cast<double>(w.edges);
    double growth = m.expansion_factor * static_cast<double>(m.layers);
    double compute = v * growth / (ns * ng * c.compute_vps);
    double internal = (e * growth / (ns * ng)) * ((ng - 1.0) / ng) / c.internal_bw_vps;
    return compute + internal;
}

double t_sampling(const WorkloadSpec& w, const ClusterSpec& c, const SamplingConfig& cfg,
                  double alpha) {
    validate(w);
    validate(c);
    if (cfg.max_hop < 1) throw InputError("t_sampling: max_hop must be >= 1");
    if (cfg.fanout < 1) throw InputError("t_sampling: fanout must be >= 1");
    if (cfg.unlimited()) throw InputError("t_sampling: fanout must be finite");
    double ns = c.num_servers;
    double ng = c.gpus_per_server;
    double v = static_cast<double>(w.vertices);
    double e = static_cast<double>(w.edges);
    double growth = std::pow(static_cast<double>(cfg.max_hop), alpha) *
                    static_cast<double>(cfg.fanout);
    double compute = v * growth / (ns * ng * c.compute_vps);
    double internal = (e * growth / (ns * ng)) * (ns * ng - 1.0) / c.internal_bw_vps;
    return compute + internal;
}

double speedup_threshold(double avg_degree, double expansion_factor, std::uint32_t layers) {
    if (avg_degree <= 0.0) throw InputError("speedup_threshold: avg_degree must be > 0");
    return (expansion_factor * static_cast<double>(layers) - 1.0) / avg_degree;
}

double alpha_for(double avg_degree, double expansion_factor) {
    if (avg_degree <= 1.0 || expansion_factor < 1.0) return 0.0;
    return std::log(expansion_factor) / std::log(avg_degree);
}

ValidityReport check_validity(const WorkloadSpec& w, const ClusterSpec& c, const ModelSpec& m,
                              const std::optional<SamplingRange>& sampling) {
    ValidityReport r;
    r.preload_growth = m.expansion_factor * static_cast<double>(m.layers);
    r.cluster_parallelism = static_cast<double>(c.total_gpus());
    r.growth_above_one = r.preload_growth > 1.0;
    r.growth_within_cluster = r.preload_growth <= r.cluster_parallelism;
    if (!r.growth_above_one) {
        r.flags.push_back("preload growth factor " + std::to_string(r.preload_growth) +
                          " not above 1");
    }
    if (!r.growth_within_cluster) {
        r.flags.push_back("preload growth factor " + std::to_string(r.preload_growth) +
                          " exceeds cluster parallelism " +
                          std::to_string(r.cluster_parallelism));
    }
    if (sampling) {
        double growth = std::pow(static_cast<double>(sampling->cfg.max_hop), sampling->alpha) *
                        static_cast<double>(sampling->cfg.fanout);
        r.sampling_growth = growth;
        r.sampling_above_one = growth > 1.0;
        r.sampling_below_preload = growth < r.preload_growth;
        if (!*r.sampling_above_one) {
            r.flags.push_back("sampling growth factor " + std::to_string(growth) +
                              " not above 1");
        }
        if (!*r.sampling_below_preload) {
            r.flags.push_back("sampling factor " + std::to_string(growth) +
                              " exceeds preload factor " + std::to_string(r.preload_growth));
        }
    }
    (void)w;
    return r;
}

std::optional<std::uint32_t> crossover_layer(const WorkloadSpec& w, const ClusterSpec& c,
                                             double expansion_factor) {
    double baseline = t_prev(w, c);
    for (std::uint32_t layers = 1; layers <= 1024; ++layers) {
        ModelSpec m;
        m.layers = layers;
        m.expansion_factor = expansion_factor;
        if (t_preload(w, c, m) > baseline) return layers;
    }
    return std::nullopt;
}

ClusterSpec load_cluster_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open cluster spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    ClusterSpec c;
    try {
        c.num_servers = j.at("num_servers").get<std::uint32_t>();
        c.gpus_per_server = j.at("gpus_per_server").get<std::uint32_t>();
        c.compute_vps = j.at("compute_vps").get<double>();
        c.internal_bw_vps = j.at("internal_bw_vps").get<double>();
        c.external_bw_vps = j.at("external_bw_vps").get<double>();
        c.gpu_mem_bytes = j.value("gpu_mem_bytes", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    validate(c);
    return c;
}

void save_cluster_spec(const ClusterSpec& c, const std::string& path) {
    nlohmann::json j{
        {"num_servers", c.num_servers},
        {"gpus_per_server", c.gpus_per_server},
        {"compute_vps", c.compute_vps},
        {"internal_bw_vps", c.internal_bw_vps},
        {"external_bw_vps", c.external_bw_vps},
        {"gpu_mem_bytes", c.gpu_mem_bytes},
    };
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace granndis
