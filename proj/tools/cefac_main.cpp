// cefac - credible evidence fusion simulator CLI.
//
// Subcommands:
//   run <config>     execute a scenario, write summary / round log / CSV
//   gen <kind>       write a scenario file (gaussian5 | recon20 | random)
//   verify <suite>   run a verification suite and report pass/fail
//
// Exit codes: 0 success/converged, 2 round budget exhausted, 1 any error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cefac/json_io.hpp"
#include "cefac/sim.hpp"
#include "cefac/util.hpp"
#include "cefac/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json outcome_to_json(const cefac::sim::NodeOutcome& out) {
    json j;
    j["node"] = out.node + 1;
    j["normal"] = out.normal;
    j["identified_dos"] = [&] {
        json a = json::array();
        for (auto v : out.identified_dos) a.push_back(v + 1);
        return a;
    }();
    j["identified_deception"] = [&] {
        json a = json::array();
        for (auto v : out.identified_deception) a.push_back(v + 1);
        return a;
    }();
    if (out.fusion) {
        j["fusion"] = cefac::fusion_result_to_json(*out.fusion);
    } else {
        j["assembly_error"] = out.assembly_error;
    }
    return j;
}

json summary_json(const cefac::sim::SimulationResult& result) {
    json j;
    j["converged"] = result.converged;
    j["rounds"] = result.rounds;
    j["normal_count"] = result.normal_count;
    j["attackers"] = [&] {
        json a = json::array();
        for (auto v : result.true_attackers) a.push_back(v + 1);
        return a;
    }();
    json nodes = json::array();
    for (const auto& out : result.outcomes) nodes.push_back(outcome_to_json(out));
    j["nodes"] = nodes;
    if (result.centralized_fusion_ref) {
        j["centralized_reference"] = cefac::fusion_result_to_json(*result.centralized_fusion_ref);
    }
    if (!result.privacy.empty()) {
        json rows = json::array();
        for (const auto& row : result.privacy) {
            rows.push_back({{"view", row.external ? "external" : "internal"},
                            {"eavesdropper", row.external ? 0 : row.eavesdropper + 1},
                            {"target", row.target + 1},
                            {"determined", row.determined},
                            {"estimate_matches", row.estimate_matches}});
        }
        j["privacy"] = rows;
    }
    // The per-node fusion table next to the benchmark, shaped like the
    // experiment report: one row per node plus the centralized row.
    json table = json::array();
    for (const auto& out : result.outcomes) {
        if (!out.fusion) continue;
        json row;
        row["row"] = out.normal ? "node " + std::to_string(out.node + 1)
                                : "node " + std::to_string(out.node + 1) + " (attacker)";
        row["probs"] = out.fusion->event_probs;
        table.push_back(row);
    }
    if (result.centralized_fusion_ref) {
        table.push_back({{"row", "centralized"}, {"probs", result.centralized_fusion_ref->event_probs}});
    }
    j["fusion_table"] = table;
    return j;
}

int cmd_run(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
            const std::string& out_dir, bool csv, std::size_t max_rounds) {
    auto cfg = cefac::sim::load_scenario(config_path);
    if (has_seed) {
        // Re-resolve generated parts under the new seed.
        json j = cefac::sim::scenario_to_json(cfg);
        j["seed"] = seed_override;
        cfg = cefac::sim::parse_scenario(j);
    }

    std::ofstream rounds_out;
    cefac::sim::RunOptions opts;
    if (max_rounds > 0) opts.max_rounds_override = max_rounds;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        rounds_out.open(fs::path(out_dir) / "rounds.ndjson");
        opts.on_round = [&](std::size_t round, const std::vector<std::vector<double>>& states) {
            json line;
            line["round"] = round;
            json s = json::object();
            for (std::size_t i = 0; i < states.size(); ++i) {
                s[std::to_string(i + 1)] = states[i];
            }
            line["states"] = s;
            rounds_out << line.dump() << "\n";
        };
    }

    const auto result = cefac::sim::run_scenario(cfg, opts);
    const json summary = summary_json(result);

    std::vector<std::pair<std::string, std::uint64_t>> artifacts;
    if (!out_dir.empty()) {
        const auto summary_path = fs::path(out_dir) / "summary.json";
        const std::string dumped = summary.dump(2);
        std::ofstream(summary_path) << dumped << "\n";
        artifacts.emplace_back(summary_path.string(), cefac::fnv1a64(dumped));

        if (csv) {
            const auto csv_path = fs::path(out_dir) / "trajectories.csv";
            std::ostringstream os;
            os << "round,node,component,value\n";
            for (std::size_t round = 0; round < result.snapshots.size(); ++round) {
                for (std::size_t i = 0; i < result.snapshots[round].size(); ++i) {
                    const auto& x = result.snapshots[round][i];
                    for (std::size_t k = 0; k < x.size(); ++k) {
                        os << round << "," << (i + 1) << "," << k << "," << x[k] << "\n";
                    }
                }
            }
            std::ofstream(csv_path) << os.str();
            artifacts.emplace_back(csv_path.string(), cefac::fnv1a64(os.str()));
        }
        rounds_out.close();

        json manifest;
        manifest["config"] = config_path;
        manifest["seed"] = cfg.seed;
        json arts = json::array();
        for (const auto& [path, hash] : artifacts) {
            std::ostringstream hex;
            hex << std::hex << hash;
            arts.push_back({{"path", path}, {"fnv1a64", hex.str()}});
        }
        manifest["artifacts"] = arts;
        std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
    } else {
        std::cout << summary.dump(2) << "\n";
    }
    return result.converged ? 0 : 2;
}

int cmd_gen(const std::string& kind, const std::string& out_path, std::size_t n, double density,
            std::uint64_t seed) {
    cefac::sim::ScenarioConfig cfg = [&] {
        if (kind == "gaussian5") return cefac::sim::make_gaussian5_scenario(seed);
        if (kind == "recon20") return cefac::sim::make_recon20_scenario(seed);
        if (kind == "random") return cefac::sim::make_random_scenario(n, density, seed);
        throw cefac::BadParams("unknown scenario kind '" + kind + "'");
    }();
    const std::string dumped = cefac::sim::scenario_to_json(cfg).dump(2);
    if (out_path.empty() || out_path == "-") {
        std::cout << dumped << "\n";
    } else {
        if (fs::path(out_path).has_parent_path()) {
            fs::create_directories(fs::path(out_path).parent_path());
        }
        std::ofstream(out_path) << dumped << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& suite) {
    const auto results = cefac::verify::run_suite(suite);
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << cefac::verify::format_result(r) << "\n";
        all_passed = all_passed && r.passed;
    }
    return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "cefac: credible evidence fusion against cyberattacks\n"
        "exit codes: 0 success/converged, 2 round budget exhausted, 1 any error"};
    app.require_subcommand(1);

    std::string config_path, out_dir, gen_kind, gen_out, suite;
    std::uint64_t seed = 0;
    bool csv = false;
    std::size_t max_rounds = 0, gen_n = 8;
    double gen_density = 0.5;

    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("config", config_path, "scenario JSON path")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "directory for summary/rounds/csv artifacts");
    run->add_flag("--csv", csv, "also write per-component state trajectories");
    run->add_option("--max-rounds", max_rounds, "override the round budget");

    auto* gen = app.add_subcommand("gen", "generate a scenario file");
    gen->add_option("kind", gen_kind, "gaussian5 | recon20 | random")->required();
    gen->add_option("--out", gen_out, "output path (default: stdout)");
    gen->add_option("--n", gen_n, "node count for 'random'");
    gen->add_option("--density", gen_density, "edge density for 'random'");
    gen->add_option("--seed", seed, "master seed");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "evidence | consensus | privacy | robustness | all")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, seed, seed_opt->count() > 0, out_dir, csv, max_rounds);
        }
        if (gen->parsed()) {
            return cmd_gen(gen_kind, gen_out, gen_n, gen_density, seed);
        }
        if (verify->parsed()) {
            return cmd_verify(suite);
        }
    } catch (const cefac::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
