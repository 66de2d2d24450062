#include "cefac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cefac/json_io.hpp"
#include "cefac/util.hpp"

namespace cefac::sim {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigInvalid("unknown field '" + it.key() + "' in " + ctx);
        }
    }
}

std::size_t node_from_file(const json& j, std::size_t n, const std::string& ctx) {
    if (!j.is_number_integer() || j.get<long long>() < 1 ||
        j.get<long long>() > static_cast<long long>(n)) {
        throw ConfigInvalid("node id in " + ctx + " must be in [1, " + std::to_string(n) + "]");
    }
    return j.get<std::size_t>() - 1;  // file ids are 1-based
}

double gaussian_pdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

// Frozen construction seed for the 20-platform reconnaissance topology; see
// make_recon20_scenario.
constexpr std::uint64_t kRecon20TopologySeed = 0;

}  // namespace

std::set<std::size_t> ScenarioConfig::attacker_ids() const {
    std::set<std::size_t> out;
    for (const auto& a : attackers) out.insert(a.node);
    return out;
}

std::set<std::size_t> ScenarioConfig::normal_ids() const {
    const auto att = attacker_ids();
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        if (!att.count(i)) out.insert(i);
    }
    return out;
}

void ScenarioConfig::validate() const {
    const std::size_t n = graph.size();
    if (evidence.size() != n) {
        throw ConfigInvalid("need one piece of evidence per node");
    }
    for (const auto& m : evidence) {
        if (!(m.frame() == frame)) {
            throw ConfigInvalid("evidence frame differs from the scenario frame");
        }
    }
    const auto att = attacker_ids();
    if (att.size() != attackers.size()) {
        throw ConfigInvalid("duplicate attacker node");
    }
    for (const auto& a : attackers) {
        if (a.node >= n) throw ConfigInvalid("attacker node out of range");
    }
    for (const auto& e : eavesdroppers) {
        if (!e.external) {
            if (e.node >= n) throw ConfigInvalid("eavesdropper node out of range");
            if (att.count(e.node)) {
                throw ConfigInvalid("a node cannot both eavesdrop and attack");
            }
        }
    }
    if (!(params.tau > 0.0)) throw ConfigInvalid("tau must be positive");
    if (!(params.delta > 0.0)) throw ConfigInvalid("delta must be positive");
    if (params.f < 0.0 || params.f >= 1.0) throw ConfigInvalid("f must lie in [0,1)");
    if (!params.epsilon.empty() && params.epsilon.size() != 1 && params.epsilon.size() != n) {
        throw ConfigInvalid("epsilon must be scalar or one value per node");
    }
    for (double e : params.epsilon) {
        if (e < 0.0 || e >= 1.0) throw ConfigInvalid("epsilon must lie in [0,1)");
    }
    if (params.key_bits < 16) throw ConfigInvalid("key_bits must be at least 16");
    if (params.max_rounds < 4) throw ConfigInvalid("max_rounds too small to run the protocol");

    if (!att.empty()) {
        if (!satisfies_f_fraction_local(graph, att, params.f, params.f_semantics)) {
            if (params.waive_robustness_check) {
                log_line(LogLevel::Warn, "attack model violated: some neighborhood exceeds the f bound");
            } else {
                throw ConfigInvalid("attackers exceed the f-fraction bound in some neighborhood");
            }
        }
        for (std::size_t a : att) {
            bool observed = false;
            for (std::size_t j : graph.out_neighbors(a)) observed = observed || !att.count(j);
            if (!observed) {
                log_line(LogLevel::Warn, "attacker " + std::to_string(a + 1) +
                                             " has no normal out-neighbor; it cannot be identified and "
                                             "the normal-node count seen by the network will drift");
            }
        }
        if (graph.size() <= 20) {
            const auto honest = normal_ids();
            auto [sub, ids] = graph.induced_subgraph(honest);
            const double p_needed = 2.0 * params.f + 1e-9;
            if (!is_strongly_p_fraction_robust(sub, p_needed)) {
                if (params.waive_robustness_check) {
                    log_line(LogLevel::Warn,
                             "honest subgraph is not strongly p-fraction robust for p > 2f; "
                             "convergence is not guaranteed");
                } else {
                    throw ConfigInvalid(
                        "honest subgraph fails strong p-fraction robustness for p > 2f; set "
                        "waive_robustness_check to run anyway");
                }
            }
        } else {
            log_line(LogLevel::Warn, "graph too large for the robustness check; skipping it");
        }
    }
}

DirectedGraph random_digraph(std::size_t n, double density, std::uint64_t seed,
                             bool require_strongly_connected) {
    for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, 0x67, attempt));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && unit(rng) < density) edges.emplace_back(i, j);
            }
        }
        DirectedGraph g(n, edges);
        if (!require_strongly_connected || g.is_strongly_connected()) return g;
    }
    throw ConfigInvalid("could not draw a strongly connected digraph at this density");
}

MassFunction generate_gaussian_evidence(const FrameOfDiscernment& frame, double true_mean,
                                        const std::vector<double>& frame_means, double sigma,
                                        std::size_t n_samples, std::mt19937_64& rng, double discount) {
    if (frame_means.size() != frame.size()) {
        throw BadParams("one class mean per frame event required");
    }
    if (!(sigma > 0.0)) throw BadParams("sigma must be positive");
    if (n_samples == 0) throw BadParams("need at least one sample");
    if (discount < 0.0 || discount >= 1.0) throw BadParams("discount must lie in [0,1)");

    std::normal_distribution<double> obs_dist(true_mean, sigma);
    std::vector<double> likelihood(frame.size(), 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double obs = obs_dist(rng);
        for (std::size_t j = 0; j < frame.size(); ++j) {
            likelihood[j] += gaussian_pdf(obs, frame_means[j], sigma);
        }
    }
    double total = 0.0;
    for (double v : likelihood) total += v;

    std::vector<double> masses(frame.subset_count(), 0.0);
    for (std::size_t j = 0; j < frame.size(); ++j) {
        masses[std::size_t{1} << j] = (1.0 - discount) * likelihood[j] / total;
    }
    masses.back() += discount;
    // Compensate accumulated rounding so the vector passes strict validation.
    double sum = 0.0;
    for (double v : masses) sum += v;
    masses.back() += 1.0 - sum;
    return MassFunction(frame, std::move(masses));
}

// ---------------------------------------------------------------------------
// parsing

namespace {

DirectedGraph parse_graph(const json& j, std::uint64_t seed) {
    if (j.contains("generator")) {
        reject_unknown(j, {"generator"}, "graph");
        const json& g = j.at("generator");
        reject_unknown(g, {"kind", "n", "density", "strongly_connected"}, "graph.generator");
        const std::string kind = g.at("kind").get<std::string>();
        if (kind != "random") throw ConfigInvalid("unknown graph generator '" + kind + "'");
        return random_digraph(g.at("n").get<std::size_t>(), g.at("density").get<double>(), seed,
                              g.value("strongly_connected", false));
    }
    reject_unknown(j, {"n", "edges"}, "graph");
    const std::size_t n = j.at("n").get<std::size_t>();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ConfigInvalid("edges must be [from, to] pairs");
        edges.emplace_back(node_from_file(e[0], n, "edges"), node_from_file(e[1], n, "edges"));
    }
    return DirectedGraph(n, edges);
}

std::vector<MassFunction> parse_evidence(const json& j, const FrameOfDiscernment& frame,
                                         std::size_t n_nodes, std::uint64_t seed) {
    std::vector<MassFunction> out;
    if (j.is_object() && j.contains("generator")) {
        reject_unknown(j, {"generator"}, "evidence");
        const json& g = j.at("generator");
        reject_unknown(g, {"kind", "class_means", "sigma", "true_means", "n_samples", "discount"},
                       "evidence.generator");
        if (g.at("kind").get<std::string>() != "gaussian") {
            throw ConfigInvalid("unknown evidence generator");
        }
        const auto class_means = g.at("class_means").get<std::vector<double>>();
        const auto true_means = g.at("true_means").get<std::vector<double>>();
        if (true_means.size() != n_nodes) {
            throw ConfigInvalid("true_means must list one value per node");
        }
        const double sigma = g.value("sigma", 1.0);
        const std::size_t n_samples = g.value("n_samples", std::size_t{1});
        const double discount = g.value("discount", 0.1);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::mt19937_64 rng(derive_seed(seed, 0xE, i));
            out.push_back(generate_gaussian_evidence(frame, true_means[i], class_means, sigma,
                                                     n_samples, rng, discount));
        }
        return out;
    }
    if (!j.is_array() || j.size() != n_nodes) {
        throw ConfigInvalid("evidence must be a generator or one entry per node");
    }
    for (const auto& entry : j) {
        if (entry.contains("frame")) {
            MassFunction m = mass_from_json(entry);
            if (!(m.frame() == frame)) throw ConfigInvalid("evidence frame mismatch");
            out.push_back(std::move(m));
        } else {
            reject_unknown(entry, {"masses"}, "evidence entry");
            json full{{"frame", frame.events()}, {"masses", entry.at("masses")}};
            out.push_back(mass_from_json(full));
        }
    }
    return out;
}

ProtocolParams parse_params(const json& j, std::size_t n_nodes) {
    ProtocolParams p;
    if (j.is_null()) return p;
    reject_unknown(j,
                   {"tau", "delta", "f", "epsilon", "stability_rounds", "key_bits", "max_rounds",
                    "encrypt_weights", "f_semantics", "threshold_semantics", "waive_robustness_check"},
                   "params");
    p.tau = j.value("tau", p.tau);
    p.delta = j.value("delta", p.delta);
    p.f = j.value("f", p.f);
    if (j.contains("epsilon")) {
        if (j.at("epsilon").is_array()) {
            p.epsilon = j.at("epsilon").get<std::vector<double>>();
        } else {
            p.epsilon = {j.at("epsilon").get<double>()};
        }
    }
    p.stability_rounds = j.value("stability_rounds", p.stability_rounds);
    p.key_bits = j.value("key_bits", p.key_bits);
    p.max_rounds = j.value("max_rounds", p.max_rounds);
    p.encrypt_weights = j.value("encrypt_weights", p.encrypt_weights);
    if (j.contains("f_semantics")) {
        const std::string s = j.at("f_semantics").get<std::string>();
        if (s == "neighborhood") p.f_semantics = FLocalSemantics::Neighborhood;
        else if (s == "literal-global") p.f_semantics = FLocalSemantics::LiteralGlobal;
        else throw ConfigInvalid("f_semantics must be 'neighborhood' or 'literal-global'");
    }
    if (j.contains("threshold_semantics")) {
        const std::string s = j.at("threshold_semantics").get<std::string>();
        if (s == "algorithm") p.threshold_semantics = protocol::ThresholdSemantics::Algorithm;
        else if (s == "prose") p.threshold_semantics = protocol::ThresholdSemantics::Prose;
        else throw ConfigInvalid("threshold_semantics must be 'algorithm' or 'prose'");
    }
    p.waive_robustness_check = j.value("waive_robustness_check", p.waive_robustness_check);
    (void)n_nodes;
    return p;
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
    reject_unknown(
        j, {"schema", "seed", "frame", "graph", "evidence", "attackers", "eavesdroppers", "params"},
        "scenario");
    if (!j.contains("schema") || j.at("schema").get<int>() != 1) {
        throw ConfigInvalid("scenario schema must be 1");
    }
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    FrameOfDiscernment frame(j.at("frame").get<std::vector<std::string>>());
    DirectedGraph graph = parse_graph(j.at("graph"), seed);
    std::vector<MassFunction> evidence = parse_evidence(j.at("evidence"), frame, graph.size(), seed);

    std::vector<adversary::AttackerSpec> attackers;
    if (j.contains("attackers")) {
        for (const auto& a : j.at("attackers")) {
            reject_unknown(a, {"node", "kind", "script", "seed"}, "attacker");
            adversary::AttackerSpec spec;
            spec.node = node_from_file(a.at("node"), graph.size(), "attackers");
            const std::string kind = a.at("kind").get<std::string>();
            if (kind == "dos") spec.kind = adversary::AttackKind::DoS;
            else if (kind == "deception") spec.kind = adversary::AttackKind::Deception;
            else throw ConfigInvalid("attacker kind must be 'dos' or 'deception'");
            spec.script = a.value("script", spec.script);
            spec.seed = a.value("seed", derive_seed(seed, 0xAD, spec.node));
            attackers.push_back(std::move(spec));
        }
    }

    std::vector<EavesdropperSpec> eavesdroppers;
    if (j.contains("eavesdroppers")) {
        for (const auto& e : j.at("eavesdroppers")) {
            reject_unknown(e, {"kind", "node"}, "eavesdropper");
            EavesdropperSpec spec;
            const std::string kind = e.at("kind").get<std::string>();
            if (kind == "external") {
                spec.external = true;
            } else if (kind == "internal") {
                spec.external = false;
                spec.node = node_from_file(e.at("node"), graph.size(), "eavesdroppers");
            } else {
                throw ConfigInvalid("eavesdropper kind must be 'internal' or 'external'");
            }
            eavesdroppers.push_back(spec);
        }
    }

    ProtocolParams params = parse_params(j.value("params", json()), graph.size());

    ScenarioConfig cfg{std::move(frame), std::move(graph),       std::move(evidence),
                       std::move(attackers), std::move(eavesdroppers), std::move(params),
                       seed};
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigInvalid("cannot open scenario file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigInvalid("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["schema"] = 1;
    j["seed"] = cfg.seed;
    j["frame"] = cfg.frame.events();

    json edges = json::array();
    for (const auto& [from, to] : cfg.graph.edges()) {
        edges.push_back({from + 1, to + 1});
    }
    j["graph"] = {{"n", cfg.graph.size()}, {"edges", edges}};

    json evidence = json::array();
    for (const auto& m : cfg.evidence) evidence.push_back(mass_to_json(m));
    j["evidence"] = evidence;

    json attackers = json::array();
    for (const auto& a : cfg.attackers) {
        attackers.push_back({{"node", a.node + 1},
                             {"kind", a.kind == adversary::AttackKind::DoS ? "dos" : "deception"},
                             {"script", a.script},
                             {"seed", a.seed}});
    }
    j["attackers"] = attackers;

    json eaves = json::array();
    for (const auto& e : cfg.eavesdroppers) {
        if (e.external) eaves.push_back({{"kind", "external"}});
        else eaves.push_back({{"kind", "internal"}, {"node", e.node + 1}});
    }
    j["eavesdroppers"] = eaves;

    json params;
    params["tau"] = cfg.params.tau;
    params["delta"] = cfg.params.delta;
    params["f"] = cfg.params.f;
    if (!cfg.params.epsilon.empty()) {
        if (cfg.params.epsilon.size() == 1) params["epsilon"] = cfg.params.epsilon[0];
        else params["epsilon"] = cfg.params.epsilon;
    }
    params["stability_rounds"] = cfg.params.stability_rounds;
    params["key_bits"] = cfg.params.key_bits;
    params["max_rounds"] = cfg.params.max_rounds;
    params["encrypt_weights"] = cfg.params.encrypt_weights;
    params["f_semantics"] =
        cfg.params.f_semantics == FLocalSemantics::Neighborhood ? "neighborhood" : "literal-global";
    params["threshold_semantics"] =
        cfg.params.threshold_semantics == protocol::ThresholdSemantics::Algorithm ? "algorithm" : "prose";
    params["waive_robustness_check"] = cfg.params.waive_robustness_check;
    j["params"] = params;
    return j;
}

// ---------------------------------------------------------------------------
// built-in scenarios

ScenarioConfig make_gaussian5_scenario(std::uint64_t seed) {
    FrameOfDiscernment frame({"A1", "A2", "A3", "A4", "A5"});
    const std::size_t n = 20;
    // Bidirectional communication at density 0.4.
    std::mt19937_64 rng(derive_seed(seed, 0x95, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DirectedGraph graph(n, {});
    for (std::size_t attempt = 0;; ++attempt) {
        std::mt19937_64 arng(derive_seed(seed, 0x95, attempt));
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                if (u(arng) < 0.4) {
                    edges.emplace_back(i, j);
                    edges.emplace_back(j, i);
                }
            }
        }
        DirectedGraph candidate(n, edges);
        if (candidate.is_strongly_connected()) {
            graph = std::move(candidate);
            break;
        }
        if (attempt > 1000) throw ConfigInvalid("could not draw a connected communication graph");
    }

    std::vector<MassFunction> evidence;
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 erng(derive_seed(seed, 0xE, i));
        const double true_mean = (i < 15) ? -2.0 : 2.0;
        evidence.push_back(
            generate_gaussian_evidence(frame, true_mean, {-2.0, -1.0, 0.0, 1.0, 2.0}, 1.0, 1, erng));
    }

    ProtocolParams params;
    params.tau = 1.0;
    params.f = 0.0;
    params.max_rounds = 600;
    ScenarioConfig cfg{std::move(frame), std::move(graph), std::move(evidence), {}, {}, params, seed};
    cfg.validate();
    return cfg;
}

ScenarioConfig make_recon20_scenario(std::uint64_t seed) {
    FrameOfDiscernment frame({"UAV", "LCV", "PER"});
    const std::size_t n = 20;
    // 1-based: DoS at 6 and 18, deception at 3 and 19.
    const std::set<std::size_t> dos_nodes{5, 17};
    const std::set<std::size_t> deception_nodes{2, 18};
    std::set<std::size_t> att = dos_nodes;
    att.insert(deception_nodes.begin(), deception_nodes.end());

    const double f = 0.125;
    DirectedGraph graph(n, {});
    bool built = false;
    for (std::size_t attempt = 0; attempt < 4000 && !built; ++attempt) {
        std::mt19937_64 grng(derive_seed(kRecon20TopologySeed, 0x20, attempt));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (att.count(i) || att.count(j)) continue;
                const double r = unit(grng);
                if (r < 0.70) {
                    edges.emplace_back(i, j);
                    edges.emplace_back(j, i);
                } else if (r < 0.82) {
                    // one-way reporting link
                    if (unit(grng) < 0.5) edges.emplace_back(i, j);
                    else edges.emplace_back(j, i);
                }
            }
        }
        // Each attacker keeps two-way links with four platforms, laid out so
        // no platform hears from more than one attacker (the f = 1/8 model).
        // Attackers also listen to several more platforms; inbound-only links
        // do not count against any normal node's attack fraction but keep the
        // attackers' own ledgers fed by honest gossip.
        std::vector<std::size_t> honest;
        for (std::size_t i = 0; i < n; ++i) {
            if (!att.count(i)) honest.push_back(i);
        }
        std::shuffle(honest.begin(), honest.end(), grng);
        std::size_t slot = 0;
        for (std::size_t a : att) {
            std::set<std::size_t> partners;
            for (std::size_t k = 0; k < 4; ++k) {
                edges.emplace_back(a, honest[slot]);
                edges.emplace_back(honest[slot], a);
                partners.insert(honest[slot]);
                ++slot;
            }
            std::size_t extra = 0;
            for (std::size_t h : honest) {
                if (extra >= 5) break;
                if (partners.count(h)) continue;
                edges.emplace_back(h, a);
                ++extra;
            }
        }

        DirectedGraph candidate(n, edges);
        if (!satisfies_f_fraction_local(candidate, att, f)) continue;
        bool degrees_ok = true;
        for (std::size_t i = 0; i < n && degrees_ok; ++i) {
            if (!att.count(i) && candidate.in_degree(i) < 8) degrees_ok = false;
        }
        if (!degrees_ok) continue;
        auto [sub, ids] = candidate.induced_subgraph(
            [&] {
                std::set<std::size_t> keep;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!att.count(i)) keep.insert(i);
                }
                return keep;
            }());
        if (!sub.is_strongly_connected()) continue;
        if (!is_strongly_p_fraction_robust(sub, 2.0 * f + 1e-9)) continue;
        graph = std::move(candidate);
        built = true;
    }
    if (!built) throw ConfigInvalid("recon20 topology construction failed");

    std::vector<MassFunction> evidence;
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 erng(derive_seed(seed, 0xE, i));
        const double true_mean = (i < 16) ? -2.0 : 2.0;  // platforms 17-20 report abnormal evidence
        evidence.push_back(generate_gaussian_evidence(frame, true_mean, {-2.0, 0.0, 2.0}, 1.0, 1, erng));
    }

    std::vector<adversary::AttackerSpec> attackers;
    for (std::size_t a : dos_nodes) {
        attackers.push_back({a, adversary::AttackKind::DoS, "", derive_seed(seed, 0xAD, a)});
    }
    for (std::size_t a : deception_nodes) {
        attackers.push_back(
            {a, adversary::AttackKind::Deception, "uniform-noise", derive_seed(seed, 0xAD, a)});
    }
    std::sort(attackers.begin(), attackers.end(),
              [](const auto& x, const auto& y) { return x.node < y.node; });

    ProtocolParams params;
    params.tau = 1.0;
    params.f = f;
    params.max_rounds = 600;
    ScenarioConfig cfg{std::move(frame),     std::move(graph), std::move(evidence),
                       std::move(attackers), {},               params,
                       seed};
    cfg.validate();
    return cfg;
}

ScenarioConfig make_random_scenario(std::size_t n, double density, std::uint64_t seed) {
    if (n < 2) throw BadParams("need at least two nodes");
    FrameOfDiscernment frame({"A1", "A2", "A3"});
    DirectedGraph graph = random_digraph(n, density, seed, true);
    std::vector<MassFunction> evidence;
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 erng(derive_seed(seed, 0xE, i));
        std::uniform_int_distribution<std::size_t> cls(0, 2);
        const double true_mean = std::vector<double>{-2.0, 0.0, 2.0}[cls(erng)];
        evidence.push_back(generate_gaussian_evidence(frame, true_mean, {-2.0, 0.0, 2.0}, 1.0, 1, erng));
    }
    ProtocolParams params;
    params.max_rounds = 600;
    ScenarioConfig cfg{std::move(frame), std::move(graph), std::move(evidence), {}, {}, params, seed};
    cfg.validate();
    return cfg;
}

}  // namespace cefac::sim
