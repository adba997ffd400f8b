/*
 * Copyright 2026 The domino-optics Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// domino_cli: reproducible experiments on the nine domino states.
//
// Exit codes: 0 pass, 2 verification failed, 3 invalid configuration,
// 4 optimizer budget exhausted.

#include "domino/domino_optics.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace {

using domino::io::InputError;
using domino::io::Json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 2;
constexpr int kExitConfig = 3;
constexpr int kExitBudget = 4;

struct Settings
{
    std::uint64_t seed = 1;
    int restarts = 0;  ///< 0: command default
    int aux_modes = 0;
    int aux_photons = 0;
    int depth = 1;
    double tolerance = 0.0;  ///< 0: command default
    int trials = 0;          ///< 0: command default
    std::size_t max_evals = 0;
    std::size_t budget = 0;
    std::string elements;
    std::string out;
    std::string trace;
    std::string config;
    bool no_timing = false;
};

/// Flag name, config key, option handle.
struct Binding
{
    std::string key;
    CLI::Option* option;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fills settings from a JSON config for every option not given on the command line.
void apply_config(Settings& s, const std::vector<Binding>& bindings)
{
    const std::string text = read_file(s.config);
    const Json j = domino::io::parse_document(text);
    if (!j.is_object()) {
        throw InputError("config must be a JSON object", 1);
    }
    std::map<std::string, CLI::Option*> known;
    for (const auto& b : bindings) {
        known[b.key] = b.option;
    }
    for (const auto& [key, value] : j.items()) {
        const auto it = known.find(key);
        if (it == known.end()) {
            throw InputError("unknown config key '" + key + "'", domino::io::line_of_key(text, key));
        }
        if (it->second->count() > 0) {
            continue;  // flags win
        }
        std::string literal;
        if (value.is_string()) {
            literal = value.get<std::string>();
        } else if (value.is_number() || value.is_boolean()) {
            literal = value.dump();
        } else {
            throw InputError("config key '" + key + "' must be a scalar", domino::io::line_of_key(text, key));
        }
        try {
            it->second->clear();
            it->second->add_result(literal);
            it->second->run_callback();
        } catch (const CLI::Error& e) {
            throw InputError("config key '" + key + "': " + e.what(), domino::io::line_of_key(text, key));
        }
    }
}

void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw InputError(message);
    }
}

domino::ModeUnitary load_unitary(const Settings& s, std::size_t dimension, Json& inputs)
{
    if (s.elements.empty()) {
        inputs["elements"] = nullptr;
        return domino::ModeUnitary::identity(dimension);
    }
    const auto list = domino::io::parse_elements(read_file(s.elements));
    if (list.dimension && *list.dimension != dimension) {
        throw InputError("element list dimension " + std::to_string(*list.dimension) + " does not match 6 + aux modes = " +
                         std::to_string(dimension));
    }
    for (const auto& e : list.elements) {
        try {
            domino::validate_element(e, dimension);
        } catch (const std::exception& ex) {
            throw InputError(ex.what());
        }
    }
    inputs["elements"] = domino::io::elements_to_json(list.elements, dimension);
    return domino::compose_elements(list.elements, dimension);
}

void check_aux(const Settings& s)
{
    require(s.aux_modes >= 0 && s.aux_modes <= 6, "--aux-modes must lie in [0, 6]");
    require(s.aux_photons >= 0 && s.aux_photons <= 4, "--aux-photons must lie in [0, 4]");
    require(s.aux_photons == 0 || s.aux_modes > 0, "--aux-photons needs at least one auxiliary mode");
}

domino::AuxiliaryPreparation make_aux(const Settings& s)
{
    return domino::AuxiliaryPreparation::fock(static_cast<std::size_t>(s.aux_modes), s.aux_photons);
}

// ---------------------------------------------------------------------------
// Commands. Each fills `inputs` and `results` and returns an exit code.

int cmd_states(const Settings& s, Json& inputs, Json& results)
{
    const double tol = s.tolerance > 0.0 ? s.tolerance : 1e-12;
    inputs["tolerance"] = tol;
    const auto set = domino::build_domino_set();
    const Eigen::MatrixXcd gram = set.gram();
    const double deviation = (gram - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff();
    results["set"] = domino::io::domino_set_to_json(set);
    results["gram"] = domino::io::matrix_to_json(gram);
    results["gram_max_deviation"] = deviation;
    return deviation < tol ? kExitPass : kExitFail;
}

int cmd_symmetry(const Settings&, Json&, Json& results)
{
    using domino::StateLabel;
    const auto set = domino::build_domino_set();
    const auto t = domino::symmetry_T();
    const auto sym_s = domino::symmetry_S();
    const auto perm_t = domino::state_permutation(t, set);
    const auto perm_s = domino::state_permutation(sym_s, set);

    bool table_ok = true;
    for (StateLabel label : StateLabel::all()) {
        const int i = label.index();
        const int k = std::abs(i);
        const int t_image = k == 0 ? 0 : (i > 0 ? 1 : -1) * (k % 4 + 1);
        table_ok = table_ok && perm_t[label.slot()].image == StateLabel(t_image) &&
                   perm_s[label.slot()].image == StateLabel(-i);
    }
    const bool t4 = t.power(4).matrix() == domino::RealMatrix6::Identity();
    const bool s2 = (sym_s * sym_s).matrix() == domino::RealMatrix6::Identity();
    Json r_maps = Json::object();
    bool r_ok = true;
    for (int k : {-4, -3, -2, -1, 1, 2, 3, 4}) {
        const auto r = domino::symmetry_R(k);
        const StateLabel image = domino::state_permutation(r, set)[StateLabel(1).slot()].image;
        r_ok = r_ok && image == StateLabel(k);
        r_maps[r.name()] = image.name();
    }
    results["T"] = domino::io::permutation_to_json(perm_t);
    results["S"] = domino::io::permutation_to_json(perm_s);
    results["R_of_psi+1"] = std::move(r_maps);
    results["table_matches"] = table_ok;
    results["T4_is_identity"] = t4;
    results["S2_is_identity"] = s2;
    results["R_maps_psi+1_correctly"] = r_ok;
    return table_ok && t4 && s2 && r_ok ? kExitPass : kExitFail;
}

int cmd_distribution(const Settings& s, Json& inputs, Json& results)
{
    check_aux(s);
    inputs["aux_modes"] = s.aux_modes;
    inputs["aux_photons"] = s.aux_photons;
    const std::size_t dim = domino::kSystemModes + static_cast<std::size_t>(s.aux_modes);
    const auto u = load_unitary(s, dim, inputs);
    const auto aux = make_aux(s);
    const auto set = domino::build_domino_set();
    std::array<domino::OutcomeDistribution, domino::kStateCount> dists;
    Json per_state = Json::object();
    for (auto label : domino::StateLabel::all()) {
        dists[label.slot()] = domino::outcome_distribution(domino::embed_with_aux(std::nullopt, aux, set.state(label)), u);
        per_state[label.name()] = domino::io::distribution_to_json(dists[label.slot()]);
    }
    Json pairs = Json::object();
    for (int k = 1; k <= 4; ++k) {
        const auto& plus = dists[domino::StateLabel(k).slot()];
        const auto& minus = dists[domino::StateLabel(-k).slot()];
        double dev = plus.size() == minus.size() ? 0.0 : 1.0;
        for (const auto& [occ, p] : plus) {
            const auto it = minus.find(occ);
            dev = std::max(dev, it == minus.end() ? 1.0 : std::abs(p - it->second));
        }
        pairs[std::to_string(k)] = dev;
    }
    results["distributions"] = std::move(per_state);
    results["plus_minus_max_difference"] = std::move(pairs);
    return kExitPass;
}

int run_optimizer(const Settings& s, Json& inputs, Json& results, bool with_trace)
{
    check_aux(s);
    domino::OptimizerConfig config;
    config.aux_modes = s.aux_modes;
    config.aux_photons = s.aux_photons;
    config.depth = s.depth;
    config.restarts = s.restarts > 0 ? s.restarts : (with_trace ? 50 : 10);
    config.seed = s.seed;
    config.max_evaluations_per_restart = s.max_evals > 0 ? s.max_evals : 1000;
    config.max_total_evaluations = s.budget;
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    inputs["aux_modes"] = config.aux_modes;
    inputs["aux_photons"] = config.aux_photons;
    inputs["depth"] = config.depth;
    inputs["restarts"] = config.restarts;
    inputs["seed"] = config.seed;
    inputs["max_evals"] = config.max_evaluations_per_restart;
    inputs["budget"] = config.max_total_evaluations;

    const auto result = domino::optimize_discrimination(config, domino::build_domino_set());
    const double p = result.report.success_probability;
    const bool above_baseline = p >= 5.0 / 9.0 - 1e-12;
    const bool below_perfect = p < 0.999;
    results["report"] = domino::io::report_to_json(result.report);
    results["strategy"] = domino::io::strategy_to_json(result.best);
    results["total_evaluations"] = result.total_evaluations;
    results["budget_exhausted"] = result.budget_exhausted;
    results["reaches_baseline"] = above_baseline;
    results["below_perfect_discrimination"] = below_perfect;
    if (with_trace && !s.trace.empty()) {
        std::ofstream trace(s.trace, std::ios::app);
        if (!trace) {
            throw InputError("cannot open trace file '" + s.trace + "'");
        }
        for (const auto& t : result.trace) {
            trace << domino::io::trace_record_to_json(t).dump() << '\n';
        }
        inputs["trace"] = s.trace;
    }
    if (result.budget_exhausted) {
        return kExitBudget;
    }
    return above_baseline && below_perfect ? kExitPass : kExitFail;
}

int cmd_discriminate(const Settings& s, Json& inputs, Json& results)
{
    if (s.elements.empty()) {
        inputs["mode"] = "search";
        return run_optimizer(s, inputs, results, false);
    }
    check_aux(s);
    inputs["mode"] = "fixed";
    inputs["aux_modes"] = s.aux_modes;
    inputs["aux_photons"] = s.aux_photons;
    const std::size_t dim = domino::kSystemModes + static_cast<std::size_t>(s.aux_modes);
    const auto u = load_unitary(s, dim, inputs);
    const auto set = domino::build_domino_set();
    const auto aux = make_aux(s);
    const auto strategy =
        domino::freeze_guesses(domino::CascadeStrategy::full_count(domino::StageTransform(u)), set, aux);
    const auto report = domino::evaluate_strategy(strategy, set, aux);
    results["report"] = domino::io::report_to_json(report);
    results["strategy"] = domino::io::strategy_to_json(strategy);
    return report.success_probability < 0.999 ? kExitPass : kExitFail;
}

int cmd_verify_a(const Settings& s, Json& inputs, Json& results)
{
    domino::AuxTrialConfig config;
    config.trials = s.trials > 0 ? s.trials : 200;
    config.seed = s.seed;
    const double tol = s.tolerance > 0.0 ? s.tolerance : 1e-8;
    inputs["trials"] = config.trials;
    inputs["seed"] = config.seed;
    inputs["tolerance"] = tol;
    inputs["max_aux_modes"] = config.max_aux_modes;
    inputs["max_aux_degree"] = config.max_aux_degree;
    const auto summary = domino::run_aux_factorization_trials(config, domino::build_domino_set());
    results["summary"] = domino::io::aux_summary_to_json(summary);
    const bool pass = summary.max_deviation < tol;
    results["passed"] = pass;
    return pass ? kExitPass : kExitFail;
}

int cmd_certify_b(const Settings& s, Json& inputs, Json& results)
{
    using domino::StateLabel;
    const int restarts = s.restarts > 0 ? s.restarts : 200;
    const double floor = s.tolerance > 0.0 ? s.tolerance : 1e-4;
    const int trials = s.trials > 0 ? s.trials : 20;
    inputs["restarts"] = restarts;
    inputs["seed"] = s.seed;
    inputs["floor"] = floor;
    inputs["reduction_trials"] = trials;
    const auto set = domino::build_domino_set();

    bool pass = true;
    Json certs = Json::array();
    for (int i0 : {0, 1}) {
        domino::CertifyOptions options;
        options.floor_threshold = floor;
        const auto cert = domino::certify_c0_infeasibility(StateLabel(i0), restarts, s.seed, set, options);
        pass = pass && cert.passed();
        certs.push_back(domino::io::certificate_to_json(cert));
    }
    results["certificates"] = std::move(certs);

    double reduction_dev = 0.0;
    for (auto label : StateLabel::all()) {
        if (label == StateLabel(0)) {
            continue;
        }
        for (int t = 0; t < trials; ++t) {
            auto rng = domino::detail::stream(s.seed, 0xBEEF + label.slot(), static_cast<std::uint64_t>(t));
            const auto u = domino::random_unitary(domino::kSystemModes + 1 + t % 2, rng());
            const auto rec = domino::reduce_by_symmetry(label, u, t % u.dimension(), set);
            reduction_dev = std::max(reduction_dev, rec.max_deviation);
        }
    }
    results["symmetry_reduction_max_deviation"] = reduction_dev;
    pass = pass && reduction_dev < 1e-10;

    const auto forced = domino::check_forced_forms(set);
    results["forced_forms"] = {{"max_deviation", domino::io::round_significant(forced.max_deviation)},
                               {"min_surviving_pair_overlap", domino::io::round_significant(forced.min_surviving)}};
    pass = pass && forced.max_deviation < 1e-12 && forced.min_surviving > floor;

    constexpr int kConsistencyTrials = 100;
    inputs["m_matrix_trials"] = kConsistencyTrials;
    const auto mm = domino::check_m_matrix_consistency(kConsistencyTrials, s.seed, set);
    results["m_matrix_consistency"] = {{"trials", mm.trials},
                                       {"quadratic_form", mm.quadratic_form},
                                       {"diagonal", mm.diagonal},
                                       {"conditional_vector", mm.conditional_vector}};
    pass = pass && mm.max_deviation() < 1e-10;
    results["passed"] = pass;
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact simulator and no-go verifier for linear-optical discrimination of the nine domino states"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(domino::io::kToolVersion));

    Settings s;
    struct Command
    {
        Command(const char* n, const char* h, int (*r)(const Settings&, Json&, Json&))
            : name(n)
            , help(h)
            , run(r)
        {}

        const char* name;
        const char* help;
        int (*run)(const Settings&, Json&, Json&);
        CLI::App* app = nullptr;
        std::vector<Binding> bindings;
    };
    std::vector<Command> commands = {
        {"states", "dump the nine states and their Gram matrix", &cmd_states},
        {"symmetry", "T / S action table and the R(+-k) maps", &cmd_symmetry},
        {"distribution", "photon-counting distributions after a unitary", &cmd_distribution},
        {"discriminate", "success probability of a fixed unitary (--elements) or of a short search", &cmd_discriminate},
        {"verify-appendix-a", "auxiliary-photon factorization identities on random instances", &cmd_verify_a},
        {"certify-appendix-b", "c0 certificates, forced forms, M-matrix consistency, symmetry reduction", &cmd_certify_b},
        {"optimize", "cascade search with a JSON-lines trace",
         [](const Settings& st, Json& in, Json& out) { return run_optimizer(st, in, out, true); }},
    };
    for (auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        c.app = sub;
        auto bind = [&](const std::string& key, CLI::Option* opt) { c.bindings.push_back({key, opt}); };
        bind("seed", sub->add_option("--seed", s.seed, "RNG seed"));
        bind("restarts", sub->add_option("--restarts", s.restarts, "optimizer / certificate restarts"));
        bind("aux_modes", sub->add_option("--aux-modes,--aux", s.aux_modes, "auxiliary modes"));
        bind("aux_photons", sub->add_option("--aux-photons", s.aux_photons, "auxiliary photons (Fock preparation)"));
        bind("depth", sub->add_option("--depth", s.depth, "cascade depth (1-3)"));
        bind("tolerance", sub->add_option("--tolerance", s.tolerance, "pass tolerance / certificate floor")
                              ->check(CLI::PositiveNumber));
        bind("trials", sub->add_option("--trials", s.trials, "random trials"));
        bind("max_evals", sub->add_option("--max-evals", s.max_evals, "objective evaluations per restart"));
        bind("budget", sub->add_option("--budget", s.budget, "total objective evaluations (0: unlimited)"));
        bind("elements", sub->add_option("--elements", s.elements, "element-list JSON file"));
        bind("out", sub->add_option("--out", s.out, "report path (default stdout)"));
        bind("trace", sub->add_option("--trace", s.trace, "JSON-lines trace path (optimize)"));
        bind("no_timing", sub->add_flag("--no-timing", s.no_timing, "omit wall-clock time (byte-stable reports)"));
        sub->add_option("--config", s.config, "JSON config file; flags win");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const Command* chosen = nullptr;
    for (const auto& c : commands) {
        if (c.app->parsed()) {
            chosen = &c;
        }
    }

    Json inputs = Json::object();
    Json results = Json::object();
    int code = kExitPass;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (!s.config.empty()) {
            apply_config(s, chosen->bindings);
            inputs["config"] = s.config;
        }
        code = chosen->run(s, inputs, results);
    } catch (const InputError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json report = {{"schema_version", domino::io::kSchemaVersion},
                   {"tool", "domino_cli"},
                   {"version", domino::io::kToolVersion},
                   {"command", chosen->name},
                   {"inputs", std::move(inputs)},
                   {"results", std::move(results)},
                   {"status", code == kExitPass ? "PASS" : (code == kExitBudget ? "BUDGET_EXHAUSTED" : "FAIL")}};
    if (!s.no_timing) {
        report["wall_clock_seconds"] = seconds;
    }
    const std::string text = report.dump(2) + '\n';
    if (s.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(s.out);
        if (!out) {
            std::cerr << "cannot write '" << s.out << "'\n";
            return kExitConfig;
        }
        out << text;
    }
    std::cerr << chosen->name << ": " << report["status"].get<std::string>() << '\n';
    return code;
}
