// Command-line surface for the planner and cost simulator: generate or load
// graphs, partition them across servers and GPUs, extract dependency
// subgraphs, plan cooperative batches, simulate epoch cost breakdowns, and
// validate dependency correctness against the reference forward pass.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "granndis/batch_plan.hpp"
#include "granndis/cost_model.hpp"
#include "granndis/errors.hpp"
#include "granndis/extract.hpp"
#include "granndis/graph.hpp"
#include "granndis/partition.hpp"
#include "granndis/reference_gnn.hpp"
#include "granndis/sim.hpp"

namespace gd = granndis;
using nlohmann::json;

namespace {

// Option values resolve as flags > config file > defaults. Each option
// registers a setter that is applied when the flag was not passed but the
// config file carries the key.
class Overlay {
public:
    void reg(CLI::Option* opt, std::string key, std::function<void(const json&)> setter) {
        entries_.push_back({opt, std::move(key), std::move(setter)});
    }

    void apply(const json& cfg) {
        for (auto& e : entries_) {
            if (e.opt->count() == 0 && cfg.contains(e.key)) e.setter(cfg.at(e.key));
        }
    }

private:
    struct Entry {
        CLI::Option* opt;
        std::string key;
        std::function<void(const json&)> setter;
    };
    std::vector<Entry> entries_;
};

std::string key_of(const std::string& flag) {
    std::string k = flag;
    while (!k.empty() && k.front() == '-') k.erase(k.begin());
    return k;
}

template <typename T>
CLI::Option* add_opt(CLI::App& cmd, Overlay& ov, const std::string& flag, T& var,
                     const std::string& desc) {
    auto* opt = cmd.add_option(flag, var, desc);
    ov.reg(opt, key_of(flag), [&var](const json& v) { var = v.get<T>(); });
    return opt;
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw gd::InputError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw gd::ParseError(path + ": " + e.what());
    }
    if (!j.is_object()) throw gd::ParseError(path + ": config must be a JSON object");
    return j;
}

std::uint64_t resolve_seed(CLI::Option* seed_opt, const json& cfg, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
    if (const char* env = std::getenv("GRANNDIS_SIM_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw gd::InputError("GRANNDIS_SIM_SEED is not an integer: " + std::string(env));
        }
    }
    return flag_value;
}

std::uint32_t fanout_of(std::int64_t flag) {
    if (flag < 0) return gd::kUnlimitedFanout;
    return static_cast<std::uint32_t>(flag);
}

std::uint64_t budget_of(std::uint64_t flag) {
    return flag == 0 ? gd::kUnlimitedMemory : flag;
}

struct Levels {
    gd::Partition server;
    gd::Partition gpu;
};

Levels split_levels(const gd::Partition& file_partition, std::uint32_t gpus_per_server) {
    if (gpus_per_server == 0 || file_partition.num_parts % gpus_per_server != 0) {
        throw gd::InputError("partition has " + std::to_string(file_partition.num_parts) +
                             " parts, not divisible by " + std::to_string(gpus_per_server) +
                             " GPUs per server");
    }
    Levels lv;
    lv.gpu = file_partition;
    lv.server.num_parts = file_partition.num_parts / gpus_per_server;
    lv.server.assignment.resize(file_partition.assignment.size());
    for (std::size_t v = 0; v < file_partition.assignment.size(); ++v) {
        lv.server.assignment[v] = file_partition.assignment[v] / gpus_per_server;
    }
    lv.server.part_sizes.assign(lv.server.num_parts, 0);
    for (std::uint32_t id : lv.server.assignment) lv.server.part_sizes[id]++;
    return lv;
}

std::string format_deviation(double x) {
    if (x == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<gd::BatchPlan> build_cobatch_plans(const gd::Graph& g, const gd::Partition& sp,
                                               std::uint32_t layers,
                                               const gd::SamplingConfig& cfg,
                                               std::uint64_t mem_budget, std::uint32_t fixed_r,
                                               const gd::ModelSpec& model) {
    std::vector<gd::BatchPlan> plans;
    for (std::uint32_t s = 0; s < sp.num_parts; ++s) {
        gd::DependencySubgraph sub = cfg.unlimited() && cfg.max_hop >= layers
                                         ? gd::extract_full(g, sp, s, layers)
                                         : gd::extract_sampled(g, sp, s, cfg);
        if (fixed_r > 0) {
            plans.push_back(gd::plan_cobatch_fixed_r(sub, g, layers, cfg, fixed_r, model));
        } else {
            plans.push_back(gd::plan_cobatch(sub, g, layers, cfg, mem_budget, model));
        }
    }
    return plans;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw gd::InputError("cannot open output file: " + path);
    out << text;
    if (!out) throw gd::InputError("failed writing output file: " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-aware planner and cost simulator for distributed GNN training"};
    app.require_subcommand(1);

    // ---- gen -------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("gen", "generate a synthetic graph edge list");
        auto ov = std::make_shared<Overlay>();
        auto type = std::make_shared<std::string>("random");
        auto n = std::make_shared<std::uint64_t>(1000);
        auto avg_degree = std::make_shared<double>(10.0);
        auto parts = std::make_shared<std::uint32_t>(4);
        auto p_in = std::make_shared<double>(0.1);
        auto p_out = std::make_shared<double>(0.01);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--type", *type, "random | planted");
        add_opt(*cmd, *ov, "--n", *n, "number of vertices");
        add_opt(*cmd, *ov, "--avg-degree", *avg_degree, "target average degree (random)");
        add_opt(*cmd, *ov, "--parts", *parts, "planted blocks");
        add_opt(*cmd, *ov, "--p-in", *p_in, "within-block edge probability (planted)");
        add_opt(*cmd, *ov, "--p-out", *p_out, "cross-block edge probability (planted)");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "generator seed");
        add_opt(*cmd, *ov, "--out", *out_path, "output edge-list path")->required();
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            if (*n > std::numeric_limits<gd::VertexId>::max()) {
                throw gd::InputError("n exceeds the supported vertex-id range");
            }
            gd::Graph g;
            if (*type == "random") {
                g = gd::gen_random_graph(static_cast<gd::VertexId>(*n), *avg_degree, s);
            } else if (*type == "planted") {
                g = gd::gen_planted_partition_graph(static_cast<gd::VertexId>(*n), *parts, *p_in,
                                                    *p_out, s);
            } else {
                throw gd::InputError("unknown graph type: " + *type);
            }
            gd::save_edge_list(g, *out_path);
        });
    }

    // ---- partition ---------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("partition", "partition a graph across servers and GPUs");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto servers = std::make_shared<std::uint32_t>(1);
        auto gpus = std::make_shared<std::uint32_t>(1);
        auto mode = std::make_shared<std::string>("mincut");
        auto epsilon = std::make_shared<double>(gd::kDefaultBalanceEps);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--servers", *servers, "number of servers");
        add_opt(*cmd, *ov, "--gpus", *gpus, "GPUs per server");
        add_opt(*cmd, *ov, "--mode", *mode, "random | mincut");
        add_opt(*cmd, *ov, "--epsilon", *epsilon, "balance slack");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "seed");
        add_opt(*cmd, *ov, "--out", *out_path, "output partition path (GPU-level ids)")
            ->required();
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            gd::Graph g = gd::load_edge_list(*graph_path);
            gd::HierarchicalPartition h = gd::hierarchical_partition(
                g, *servers, *gpus, gd::partition_mode_from_string(*mode), s, *epsilon);
            gd::save_partition(h.gpu, *out_path);
        });
    }

    // ---- extract -----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("extract", "extract a server's dependency subgraph");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto partition_path = std::make_shared<std::string>();
        auto gpus = std::make_shared<std::uint32_t>(1);
        auto server = std::make_shared<std::uint32_t>(0);
        auto layers = std::make_shared<std::uint32_t>(1);
        auto max_hop = std::make_shared<std::uint32_t>(1);
        auto fanout = std::make_shared<std::int64_t>(15);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--partition", *partition_path, "partition path")->required();
        add_opt(*cmd, *ov, "--gpus", *gpus, "GPUs per server encoded in the partition file");
        add_opt(*cmd, *ov, "--server", *server, "server id");
        add_opt(*cmd, *ov, "--layers", *layers, "hop limit for full extraction");
        auto* hop_opt = add_opt(*cmd, *ov, "--max-hop", *max_hop, "sampled extraction max hop");
        auto* fan_opt =
            add_opt(*cmd, *ov, "--fanout", *fanout, "sampled fanout, negative = unlimited");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "sampling seed");
        add_opt(*cmd, *ov, "--out", *out_path, "subgraph dump path")->required();
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            gd::Graph g = gd::load_edge_list(*graph_path);
            Levels lv = split_levels(gd::load_partition(*partition_path), *gpus);
            bool sampled = hop_opt->count() > 0 || fan_opt->count() > 0 ||
                           cfg.contains("max-hop") || cfg.contains("fanout");
            gd::DependencySubgraph sub;
            if (sampled) {
                gd::SamplingConfig sc{*max_hop, fanout_of(*fanout), s};
                sub = gd::extract_sampled(g, lv.server, *server, sc);
            } else {
                sub = gd::extract_full(g, lv.server, *server, *layers);
            }
            gd::save_subgraph_dump(sub, *out_path);
        });
    }

    // ---- plan --------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("plan", "plan cooperative or baseline mini-batches");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto partition_path = std::make_shared<std::string>();
        auto gpus = std::make_shared<std::uint32_t>(1);
        auto layers = std::make_shared<std::uint32_t>(3);
        auto hidden = std::make_shared<std::uint32_t>(64);
        auto feature_dim = std::make_shared<std::uint32_t>(64);
        auto d_alpha = std::make_shared<double>(1.5);
        auto mem_budget = std::make_shared<std::uint64_t>(0);
        auto batches = std::make_shared<std::uint32_t>(0);
        auto max_hop = std::make_shared<std::uint32_t>(1);
        auto fanout = std::make_shared<std::int64_t>(15);
        auto baseline = std::make_shared<bool>(false);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--partition", *partition_path, "partition path")->required();
        add_opt(*cmd, *ov, "--gpus", *gpus, "GPUs per server encoded in the partition file");
        add_opt(*cmd, *ov, "--layers", *layers, "model layers");
        add_opt(*cmd, *ov, "--hidden", *hidden, "hidden dimension");
        add_opt(*cmd, *ov, "--feature-dim", *feature_dim, "input feature dimension");
        add_opt(*cmd, *ov, "--d-alpha", *d_alpha, "per-layer expansion factor");
        add_opt(*cmd, *ov, "--mem-budget", *mem_budget, "bytes per batch, 0 = unlimited");
        add_opt(*cmd, *ov, "--batches", *batches, "explicit batch count, 0 = search");
        add_opt(*cmd, *ov, "--max-hop", *max_hop, "sampling max hop");
        add_opt(*cmd, *ov, "--fanout", *fanout, "sampling fanout, negative = unlimited");
        cmd->add_flag("--baseline", *baseline, "plan per-GPU split-then-fetch batches instead");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "seed");
        add_opt(*cmd, *ov, "--out", *out_path, "output JSON path")->required();
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            gd::Graph g = gd::load_edge_list(*graph_path);
            Levels lv = split_levels(gd::load_partition(*partition_path), *gpus);
            gd::ModelSpec model{*layers, *hidden, *feature_dim, *d_alpha};
            std::uint64_t budget = budget_of(*mem_budget);

            std::ostringstream body;
            body << "[\n";
            if (*baseline) {
                for (std::uint32_t gpu = 0; gpu < lv.gpu.num_parts; ++gpu) {
                    gd::BatchPlan plan = gd::plan_minibatch_baseline(
                        g, lv.gpu, gpu, *layers, fanout_of(*fanout), budget, model, s);
                    body << gd::plan_to_json(plan) << (gpu + 1 < lv.gpu.num_parts ? ",\n" : "\n");
                }
            } else {
                gd::SamplingConfig sc{*max_hop, fanout_of(*fanout), s};
                std::vector<gd::BatchPlan> plans =
                    build_cobatch_plans(g, lv.server, *layers, sc, budget, *batches, model);
                for (std::size_t i = 0; i < plans.size(); ++i) {
                    body << gd::plan_to_json(plans[i]) << (i + 1 < plans.size() ? ",\n" : "\n");
                }
            }
            body << "]\n";
            write_text(*out_path, body.str());
        });
    }

    // ---- simulate ------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("simulate", "simulate one training epoch");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto partition_path = std::make_shared<std::string>();
        auto cluster_path = std::make_shared<std::string>();
        auto layers = std::make_shared<std::uint32_t>(3);
        auto hidden = std::make_shared<std::uint32_t>(64);
        auto feature_dim = std::make_shared<std::uint32_t>(64);
        auto d_alpha = std::make_shared<double>(1.5);
        auto strategy = std::make_shared<std::string>("full-graph");
        auto max_hop = std::make_shared<std::uint32_t>(1);
        auto fanout = std::make_shared<std::int64_t>(15);
        auto mem_budget = std::make_shared<std::uint64_t>(0);
        auto batches = std::make_shared<std::uint32_t>(0);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--partition", *partition_path, "partition path (GPU-level)")
            ->required();
        add_opt(*cmd, *ov, "--cluster", *cluster_path, "cluster spec JSON")->required();
        add_opt(*cmd, *ov, "--layers", *layers, "model layers");
        add_opt(*cmd, *ov, "--hidden", *hidden, "hidden dimension");
        add_opt(*cmd, *ov, "--feature-dim", *feature_dim, "input feature dimension");
        add_opt(*cmd, *ov, "--d-alpha", *d_alpha, "per-layer expansion factor");
        add_opt(*cmd, *ov, "--strategy", *strategy,
                "full-graph | preload | preload-eas | cobatch");
        add_opt(*cmd, *ov, "--max-hop", *max_hop, "sampling max hop");
        add_opt(*cmd, *ov, "--fanout", *fanout, "sampling fanout, negative = unlimited");
        add_opt(*cmd, *ov, "--mem-budget", *mem_budget, "cobatch budget bytes, 0 = unlimited");
        add_opt(*cmd, *ov, "--batches", *batches, "explicit cobatch count, 0 = search");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "seed");
        add_opt(*cmd, *ov, "--out", *out_path, "output CSV path")->required();
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            gd::Graph g = gd::load_edge_list(*graph_path);
            gd::ClusterSpec cluster = gd::load_cluster_spec(*cluster_path);
            Levels lv = split_levels(gd::load_partition(*partition_path),
                                     cluster.gpus_per_server);
            gd::ModelSpec model{*layers, *hidden, *feature_dim, *d_alpha};
            gd::Strategy strat = gd::strategy_from_string(*strategy);
            gd::SamplingConfig sc{*max_hop, fanout_of(*fanout), s};

            std::vector<gd::BatchPlan> plans;
            const std::vector<gd::BatchPlan>* plans_ptr = nullptr;
            if (strat == gd::Strategy::Cobatch) {
                plans = build_cobatch_plans(g, lv.server, *layers, sc, budget_of(*mem_budget),
                                            *batches, model);
                plans_ptr = &plans;
            }
            gd::CostBreakdown bd = gd::simulate_epoch(g, lv.server, lv.gpu, cluster, model,
                                                      strat, sc, plans_ptr);
            std::ostringstream csv;
            gd::write_breakdown_csv(csv, bd);
            write_text(*out_path, csv.str());
        });
    }

    // ---- validate -------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand(
            "validate", "check server-local outputs against the full-graph forward pass");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto partition_path = std::make_shared<std::string>();
        auto gpus = std::make_shared<std::uint32_t>(1);
        auto layers = std::make_shared<std::uint32_t>(2);
        auto hidden = std::make_shared<std::uint32_t>(8);
        auto feature_dim = std::make_shared<std::uint32_t>(8);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--partition", *partition_path, "partition path")->required();
        add_opt(*cmd, *ov, "--gpus", *gpus, "GPUs per server encoded in the partition file");
        add_opt(*cmd, *ov, "--layers", *layers, "model layers");
        add_opt(*cmd, *ov, "--hidden", *hidden, "hidden dimension");
        add_opt(*cmd, *ov, "--feature-dim", *feature_dim, "input feature dimension");
        auto* seed_opt = add_opt(*cmd, *ov, "--seed", *seed, "seed");
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            std::uint64_t s = resolve_seed(seed_opt, cfg, *seed);
            gd::Graph g = gd::load_edge_list(*graph_path);
            Levels lv = split_levels(gd::load_partition(*partition_path), *gpus);
            gd::EquivalenceReport rep =
                gd::equivalence_check(g, lv.server, *layers, s, *feature_dim, *hidden);
            std::cout << "max_deviation " << format_deviation(rep.max_deviation) << "\n";
        });
    }

    // ---- report ---------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("report", "analytic latency model report");
        auto ov = std::make_shared<Overlay>();
        auto graph_path = std::make_shared<std::string>();
        auto cluster_path = std::make_shared<std::string>();
        auto layers = std::make_shared<std::uint32_t>(3);
        auto hidden = std::make_shared<std::uint32_t>(64);
        auto feature_dim = std::make_shared<std::uint32_t>(64);
        auto d_alpha = std::make_shared<double>(1.5);
        auto max_hop = std::make_shared<std::uint32_t>(1);
        auto fanout = std::make_shared<std::int64_t>(15);
        auto out_path = std::make_shared<std::string>();
        auto config_path = std::make_shared<std::string>();

        add_opt(*cmd, *ov, "--graph", *graph_path, "edge-list path")->required();
        add_opt(*cmd, *ov, "--cluster", *cluster_path, "cluster spec JSON")->required();
        add_opt(*cmd, *ov, "--layers", *layers, "model layers");
        add_opt(*cmd, *ov, "--hidden", *hidden, "hidden dimension");
        add_opt(*cmd, *ov, "--feature-dim", *feature_dim, "input feature dimension");
        add_opt(*cmd, *ov, "--d-alpha", *d_alpha, "per-layer expansion factor");
        add_opt(*cmd, *ov, "--max-hop", *max_hop, "sampling max hop");
        add_opt(*cmd, *ov, "--fanout", *fanout, "sampling fanout, negative = unlimited");
        add_opt(*cmd, *ov, "--out", *out_path, "output JSON path (default stdout)");
        cmd->add_option("--config", *config_path, "JSON config file");

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            ov->apply(cfg);
            gd::Graph g = gd::load_edge_list(*graph_path);
            gd::ClusterSpec cluster = gd::load_cluster_spec(*cluster_path);
            gd::WorkloadSpec w = gd::workload_of(g);
            gd::ModelSpec model{*layers, *hidden, *feature_dim, *d_alpha};
            double alpha = gd::alpha_for(w.avg_degree(), *d_alpha);

            json j;
            j["workload"] = {{"vertices", w.vertices},
                             {"edges", w.edges},
                             {"avg_degree", w.avg_degree()}};
            j["t_prev_s"] = gd::t_prev(w, cluster);
            j["t_preload_s"] = gd::t_preload(w, cluster, model);
            std::optional<gd::SamplingRange> range;
            if (*fanout > 0) {
                gd::SamplingConfig sc{*max_hop, fanout_of(*fanout), 0};
                range = gd::SamplingRange{sc, alpha};
                j["t_sampling_s"] = gd::t_sampling(w, cluster, sc, alpha);
            }
            j["speedup_threshold"] =
                gd::speedup_threshold(w.avg_degree(), *d_alpha, *layers);
            auto crossover = gd::crossover_layer(w, cluster, *d_alpha);
            j["crossover_layer"] = crossover ? json(*crossover) : json(nullptr);
            gd::ValidityReport validity = gd::check_validity(w, cluster, model, range);
            j["validity"] = {{"ok", validity.ok()},
                             {"preload_growth", validity.preload_growth},
                             {"cluster_parallelism", validity.cluster_parallelism},
                             {"flags", validity.flags}};
            if (validity.sampling_growth) {
                j["validity"]["sampling_growth"] = *validity.sampling_growth;
            }
            std::string text = j.dump(2) + "\n";
            if (out_path->empty()) {
                std::cout << text;
            } else {
                write_text(*out_path, text);
            }
        });
    }

    // ---- sweep ------------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("sweep", "run a parameter grid and emit one CSV row each");
        auto config_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        cmd->add_option("--config", *config_path, "JSON config with fixed keys and a grid object")
            ->required();
        cmd->add_option("--out", *out_path, "output CSV path")->required();

        cmd->callback([=]() {
            json cfg = load_config(*config_path);
            if (!cfg.contains("grid") || !cfg.at("grid").is_object()) {
                throw gd::InputError("sweep config needs a \"grid\" object");
            }
            const json& grid = cfg.at("grid");
            auto axis = [&](const std::string& key, const json& fallback) -> json {
                if (!grid.contains(key)) return json::array({fallback});
                const json& a = grid.at(key);
                if (!a.is_array() || a.empty()) {
                    throw gd::InputError("sweep grid key \"" + key + "\" must be a non-empty array");
                }
                return a;
            };

            std::string graph_path = cfg.at("graph").get<std::string>();
            std::string cluster_path = cfg.at("cluster").get<std::string>();
            gd::Graph g = gd::load_edge_list(graph_path);
            gd::ClusterSpec base_cluster = gd::load_cluster_spec(cluster_path);
            Levels lv = cfg.contains("partition")
                            ? split_levels(gd::load_partition(cfg.at("partition")),
                                           base_cluster.gpus_per_server)
                            : [&] {
                                  gd::HierarchicalPartition h = gd::hierarchical_partition(
                                      g, base_cluster.num_servers, base_cluster.gpus_per_server,
                                      gd::PartitionMode::MinCut, cfg.value("seed", 0ULL));
                                  return Levels{h.server, h.gpu};
                              }();
            double d_alpha = cfg.value("d-alpha", 1.5);
            std::uint32_t feature_dim = cfg.value("feature-dim", 64u);
            std::uint64_t seed = cfg.value("seed", 0ULL);
            std::uint64_t budget = budget_of(cfg.value("mem-budget", 0ULL));

            json layers_axis = axis("layers", 3);
            json hidden_axis = axis("hidden", 64);
            json strategy_axis = axis("strategy", "full-graph");
            json hop_axis = axis("max-hop", 1);
            json fanout_axis = axis("fanout", 15);
            json ext_bw_axis = axis("external-bw", base_cluster.external_bw_vps);

            std::ostringstream out;
            out << "layers,hidden,strategy,max_hop,fanout,external_bw,halo_vertices,"
                   "features_preloaded,compute_s,internal_s,external_s,sync_s,total_s,error\n";
            char buf[64];
            auto num = [&](double x) {
                std::snprintf(buf, sizeof(buf), "%.12g", x);
                return std::string(buf);
            };
            for (const json& jl : layers_axis)
                for (const json& jh : hidden_axis)
                    for (const json& js : strategy_axis)
                        for (const json& jm : hop_axis)
                            for (const json& jf : fanout_axis)
                                for (const json& jb : ext_bw_axis) {
                                    std::uint32_t L = jl.get<std::uint32_t>();
                                    std::uint32_t hidden = jh.get<std::uint32_t>();
                                    std::string strat_name = js.get<std::string>();
                                    std::uint32_t m = jm.get<std::uint32_t>();
                                    std::int64_t f = jf.get<std::int64_t>();
                                    double ext_bw = jb.get<double>();
                                    out << L << "," << hidden << "," << strat_name << "," << m
                                        << "," << f << "," << num(ext_bw) << ",";
                                    try {
                                        gd::ClusterSpec cluster = base_cluster;
                                        cluster.external_bw_vps = ext_bw;
                                        gd::ModelSpec model{L, hidden, feature_dim, d_alpha};
                                        gd::Strategy strat =
                                            gd::strategy_from_string(strat_name);
                                        gd::SamplingConfig sc{m, fanout_of(f), seed};
                                        std::uint64_t halo = 0;
                                        if (strat != gd::Strategy::FullGraphBaseline) {
                                            for (std::uint32_t sv = 0; sv < lv.server.num_parts;
                                                 ++sv) {
                                                gd::DependencySubgraph sub =
                                                    strat == gd::Strategy::SharedPreload
                                                        ? gd::extract_full(g, lv.server, sv, L)
                                                        : gd::extract_sampled(g, lv.server, sv,
                                                                              sc);
                                                halo += sub.halo_vertices.size();
                                            }
                                        }
                                        std::vector<gd::BatchPlan> plans;
                                        const std::vector<gd::BatchPlan>* plans_ptr = nullptr;
                                        if (strat == gd::Strategy::Cobatch) {
                                            plans = build_cobatch_plans(g, lv.server, L, sc,
                                                                        budget, 0, model);
                                            plans_ptr = &plans;
                                        }
                                        gd::CostBreakdown bd =
                                            gd::simulate_epoch(g, lv.server, lv.gpu, cluster,
                                                               model, strat, sc, plans_ptr);
                                        out << halo << "," << bd.features_preloaded << ","
                                            << num(bd.compute_s) << ","
                                            << num(bd.internal_comm_s) << ","
                                            << num(bd.external_comm_s) << ","
                                            << num(bd.grad_sync_s) << "," << num(bd.total_s)
                                            << ",\n";
                                    } catch (const gd::Error& e) {
                                        out << ",,,,,,," << e.category() << "\n";
                                    }
                                }
            write_text(*out_path, out.str());
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERROR input: " << e.what() << "\n";
        return 1;
    } catch (const gd::CapacityError& e) {
        std::cerr << "ERROR capacity: " << e.what() << "\n";
        return 2;
    } catch (const gd::Error& e) {
        std::cerr << "ERROR " << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "ERROR parse: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
