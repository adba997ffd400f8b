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

/**
 * @file measure.hpp
 * @brief Photon counting, conditional states and cascaded measurement
 * strategies.
 *
 * Conditional states follow the unnormalized convention: after applying U
 * and writing P = sum_N (d^dag)^N Q^(N), detecting N photons in d leaves
 * Q^(N) on the remaining modes, with probability N! <0|Q^(N)dag Q^(N)|0>.
 *
 * A cascade is a tree of stages. Each stage mixes the surviving modes with
 * a unitary and then either counts one mode and branches on the count
 * (DetectStage), counts every mode (CountLeaf), or stops (GuessLeaf). After a
 * detection the measured mode is removed and the remaining indices are
 * compacted, so a child stage's unitary acts on one mode fewer.
 */
#pragma once

#include "domino/domino.hpp"
#include "domino/fock.hpp"
#include "domino/optics.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace domino {

/// Inputs must be normalized to this tolerance.
inline constexpr double kNormTolerance = 1e-8;

struct ConditionalState
{
    CreationPolynomial state;  ///< Q^(N) over the remaining modes, unnormalized
    double probability = 0.0;
};

namespace detail {

inline void require_unit_norm(const CreationPolynomial& p, const char* where)
{
    const double norm2 = vacuum_norm_squared(p);
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        throw std::invalid_argument(std::string(where) + ": input state is not normalized (norm^2 = " +
                                    std::to_string(norm2) + ")");
    }
}

/// Q^(N) for every N up to the degree in `mode`, with `mode` removed.
inline std::vector<CreationPolynomial> split_by_count(const CreationPolynomial& p, std::size_t mode)
{
    const int top = degree_in_mode(p, mode);
    std::vector<std::vector<Term>> buckets(static_cast<std::size_t>(top) + 1);
    const std::size_t reduced = p.mode_count() - 1;
    for (const auto& t : p.terms()) {
        Monomial m(reduced);
        for (std::size_t k = 0, j = 0; k < p.mode_count(); ++k) {
            if (k != mode) {
                m.set(j++, t.monomial[k]);
            }
        }
        buckets[static_cast<std::size_t>(t.monomial[mode])].push_back({m, t.amplitude});
    }
    std::vector<CreationPolynomial> out;
    out.reserve(buckets.size());
    for (auto& b : buckets) {
        out.emplace_back(reduced, std::move(b));
    }
    return out;
}

}  // namespace detail

/// Detects N photons in output mode d of U applied to a normalized state.
inline ConditionalState conditional_state(const CreationPolynomial& state, const ModeUnitary& u, std::size_t d, int n)
{
    if (n < 0) {
        throw std::invalid_argument("conditional_state: photon number must be non-negative");
    }
    if (d >= state.mode_count()) {
        throw std::out_of_range("conditional_state: detected mode out of range");
    }
    detail::require_unit_norm(state, "conditional_state");
    const CreationPolynomial out = apply_unitary(state, u);
    const CreationPolynomial q = remove_mode(coefficient_of_power(out, d, n), d);
    return {q, factorial(n) * vacuum_norm_squared(q)};
}

/// Photon-number occupation of every mode.
using Occupation = std::vector<int>;
using OutcomeDistribution = std::map<Occupation, double>;

/// Counting statistics of a polynomial already expressed in output modes.
inline OutcomeDistribution counting_distribution(const CreationPolynomial& p)
{
    OutcomeDistribution dist;
    for (const auto& t : p.terms()) {
        dist[t.monomial.exponents()] += std::norm(t.amplitude) * t.monomial.factorial_weight();
    }
    return dist;
}

/// Joint photon-number distribution of every output mode of U.
inline OutcomeDistribution outcome_distribution(const CreationPolynomial& state, const ModeUnitary& u)
{
    detail::require_unit_norm(state, "outcome_distribution");
    return counting_distribution(apply_unitary(state, u));
}

/**
 * Minimum-error success under a uniform prior:
 * (1/K) sum_outcome max_i p(outcome | i).
 */
template <typename Key>
double optimal_guess_success(const std::vector<std::map<Key, double>>& distributions)
{
    if (distributions.empty()) {
        throw std::invalid_argument("optimal_guess_success: no distributions");
    }
    std::map<Key, double> best;
    for (const auto& dist : distributions) {
        double total = 0.0;
        for (const auto& [outcome, p] : dist) {
            total += p;
            auto [it, inserted] = best.try_emplace(outcome, p);
            if (!inserted && p > it->second) {
                it->second = p;
            }
        }
        if (std::abs(total - 1.0) > kNormTolerance) {
            throw std::invalid_argument("optimal_guess_success: distribution sums to " + std::to_string(total));
        }
    }
    double sum = 0.0;
    for (const auto& [outcome, p] : best) {
        sum += p;
    }
    return sum / static_cast<double>(distributions.size());
}

/**
 * A stage unitary kept both as a matrix and as an element list; polynomials
 * are transformed through whichever representation is cheaper for the input.
 */
class StageTransform
{
public:
    explicit StageTransform(ModeUnitary unitary)
        : unitary_(std::move(unitary))
        , elements_(decompose_unitary(unitary_))
    {}

    StageTransform(std::size_t dimension, std::vector<OpticalElement> elements)
        : unitary_(compose_elements(elements, dimension))
        , elements_(std::move(elements))
    {}

    static StageTransform identity(std::size_t dimension) { return StageTransform(dimension, {}); }

    std::size_t dimension() const { return unitary_.dimension(); }
    const ModeUnitary& unitary() const { return unitary_; }
    const std::vector<OpticalElement>& elements() const { return elements_; }

    CreationPolynomial apply(const CreationPolynomial& p) const
    {
        if (p.mode_count() != dimension()) {
            throw std::invalid_argument("StageTransform::apply: dimension mismatch");
        }
        // matrix substitution costs ~ dim^degree per term, the element sweep
        // ~ (degree + 1) per term and element: take the cheaper route
        double by_matrix = 0.0;
        double by_elements = 0.0;
        for (const auto& t : p.terms()) {
            const int degree = t.monomial.total_degree();
            by_matrix += std::pow(static_cast<double>(dimension()), degree);
            by_elements += static_cast<double>(elements_.size()) * (degree + 1);
        }
        return by_matrix <= by_elements ? apply_unitary(p, unitary_) : apply_elements(p, elements_);
    }

private:
    ModeUnitary unitary_;
    std::vector<OpticalElement> elements_;
};

struct CascadeNode;
using CascadeNodePtr = std::shared_ptr<const CascadeNode>;

/// Stop and guess; an empty guess means "most likely label".
struct GuessLeaf
{
    std::optional<StateLabel> guess;
};

/// Mix, count every mode, and guess per occupation pattern. Patterns absent
/// from `guesses` are guessed as the most likely label.
struct CountLeaf
{
    StageTransform transform;
    std::map<Occupation, StateLabel> guesses;
};

/// Mix, count one mode, continue with the child for that count.
struct DetectStage
{
    StageTransform transform;
    std::size_t detected_mode = 0;
    std::map<int, CascadeNodePtr> children;
    CascadeNodePtr fallback;  ///< used for counts without an explicit child
};

struct CascadeNode
{
    std::variant<GuessLeaf, CountLeaf, DetectStage> body;
};

inline CascadeNodePtr make_node(GuessLeaf leaf) { return std::make_shared<const CascadeNode>(CascadeNode{std::move(leaf)}); }
inline CascadeNodePtr make_node(CountLeaf leaf) { return std::make_shared<const CascadeNode>(CascadeNode{std::move(leaf)}); }
inline CascadeNodePtr make_node(DetectStage stage) { return std::make_shared<const CascadeNode>(CascadeNode{std::move(stage)}); }

/// Default bound on the number of stages along any branch.
inline constexpr int kDefaultDepthLimit = 3;

/// Outcome-indexed tree of measurement stages over `input_modes` modes.
class CascadeStrategy
{
public:
    CascadeStrategy(CascadeNodePtr root, std::size_t input_modes)
        : root_(std::move(root))
        , input_modes_(input_modes)
    {
        if (!root_) {
            throw std::invalid_argument("CascadeStrategy: null root");
        }
        check_dimensions(*root_, input_modes_);
    }

    static CascadeStrategy guess_only(StateLabel label, std::size_t input_modes)
    {
        return CascadeStrategy(make_node(GuessLeaf{label}), input_modes);
    }

    /// One unitary followed by counting every mode, guessing optimally.
    static CascadeStrategy full_count(StageTransform transform)
    {
        const std::size_t modes = transform.dimension();
        return CascadeStrategy(make_node(CountLeaf{std::move(transform), {}}), modes);
    }

    const CascadeNode& root() const { return *root_; }
    const CascadeNodePtr& root_ptr() const { return root_; }
    std::size_t input_modes() const { return input_modes_; }

    /// Number of mixing stages on the longest branch.
    int depth() const { return depth_of(*root_); }

private:
    static int depth_of(const CascadeNode& node)
    {
        if (std::holds_alternative<GuessLeaf>(node.body)) {
            return 0;
        }
        if (std::holds_alternative<CountLeaf>(node.body)) {
            return 1;
        }
        const auto& stage = std::get<DetectStage>(node.body);
        int deepest = 0;
        for (const auto& [count, child] : stage.children) {
            deepest = std::max(deepest, depth_of(*child));
        }
        if (stage.fallback) {
            deepest = std::max(deepest, depth_of(*stage.fallback));
        }
        return 1 + deepest;
    }

    static void check_dimensions(const CascadeNode& node, std::size_t modes)
    {
        if (const auto* leaf = std::get_if<CountLeaf>(&node.body)) {
            if (leaf->transform.dimension() != modes) {
                throw std::invalid_argument("CascadeStrategy: counting stage unitary has dimension " +
                                            std::to_string(leaf->transform.dimension()) + ", expected " +
                                            std::to_string(modes));
            }
        } else if (const auto* stage = std::get_if<DetectStage>(&node.body)) {
            if (stage->transform.dimension() != modes) {
                throw std::invalid_argument("CascadeStrategy: stage unitary has dimension " +
                                            std::to_string(stage->transform.dimension()) + ", expected " +
                                            std::to_string(modes));
            }
            if (stage->detected_mode >= modes) {
                throw std::invalid_argument("CascadeStrategy: detected mode out of range");
            }
            if (modes < 2) {
                throw std::invalid_argument("CascadeStrategy: cannot detect the last remaining mode");
            }
            for (const auto& [count, child] : stage->children) {
                if (!child) {
                    throw std::invalid_argument("CascadeStrategy: null child");
                }
                check_dimensions(*child, modes - 1);
            }
            if (stage->fallback) {
                check_dimensions(*stage->fallback, modes - 1);
            }
        }
    }

    CascadeNodePtr root_;
    std::size_t input_modes_;
};

struct OutcomeRow
{
    std::string outcome;
    std::array<double, kStateCount> probabilities{};  ///< p(outcome | label), slot order
    StateLabel guess;
};

struct DiscriminationReport
{
    double success_probability = 0.0;
    std::array<double, kStateCount> per_state_success{};
    std::vector<OutcomeRow> confusion;  ///< sorted by outcome string
};

namespace detail {

/// Outcome path encoding: detection counts, then -1, then the final occupation.
using OutcomeKey = std::vector<int>;

struct OutcomeTally
{
    std::array<double, kStateCount> probabilities{};
    std::optional<StateLabel> guess;
};

using StateBundle = std::array<CreationPolynomial, kStateCount>;

inline StateLabel most_likely(const std::array<double, kStateCount>& p)
{
    std::size_t best = 0;
    for (std::size_t s = 1; s < kStateCount; ++s) {
        if (p[s] > p[best]) {
            best = s;
        }
    }
    return StateLabel::from_slot(best);
}

inline void tally_node(const CascadeNode& node, const StateBundle& states, OutcomeKey& path,
                       std::map<OutcomeKey, OutcomeTally>& sink)
{
    if (const auto* leaf = std::get_if<GuessLeaf>(&node.body)) {
        auto& row = sink[path];
        for (std::size_t s = 0; s < kStateCount; ++s) {
            row.probabilities[s] += vacuum_norm_squared(states[s]);
        }
        row.guess = leaf->guess;
        return;
    }
    if (const auto* leaf = std::get_if<CountLeaf>(&node.body)) {
        path.push_back(-1);
        const std::size_t base = path.size();
        for (std::size_t s = 0; s < kStateCount; ++s) {
            const CreationPolynomial out = leaf->transform.apply(states[s]);
            for (const auto& t : out.terms()) {
                path.resize(base);
                for (std::size_t k = 0; k < out.mode_count(); ++k) {
                    path.push_back(t.monomial[k]);
                }
                auto& row = sink[path];
                row.probabilities[s] += std::norm(t.amplitude) * t.monomial.factorial_weight();
                auto it = leaf->guesses.find(t.monomial.exponents());
                if (it != leaf->guesses.end()) {
                    row.guess = it->second;
                }
            }
        }
        path.resize(base - 1);
        return;
    }
    const auto& stage = std::get<DetectStage>(node.body);
    std::array<std::vector<CreationPolynomial>, kStateCount> split;
    int top = -1;
    for (std::size_t s = 0; s < kStateCount; ++s) {
        split[s] = split_by_count(stage.transform.apply(states[s]), stage.detected_mode);
        for (std::size_t n = 0; n < split[s].size(); ++n) {
            if (!split[s][n].is_zero()) {
                top = std::max(top, static_cast<int>(n));
            }
        }
    }
    const std::size_t reduced = stage.transform.dimension() - 1;
    for (int n = 0; n <= top; ++n) {
        StateBundle branch;
        bool reachable = false;
        const double scale = std::sqrt(factorial(n));
        for (std::size_t s = 0; s < kStateCount; ++s) {
            if (static_cast<std::size_t>(n) < split[s].size() && !split[s][static_cast<std::size_t>(n)].is_zero()) {
                branch[s] = scale * split[s][static_cast<std::size_t>(n)];
                reachable = true;
            } else {
                branch[s] = CreationPolynomial(reduced);
            }
        }
        if (!reachable) {
            continue;
        }
        auto it = stage.children.find(n);
        const CascadeNodePtr& child = it != stage.children.end() ? it->second : stage.fallback;
        if (!child) {
            throw std::invalid_argument("evaluate_strategy: reachable count " + std::to_string(n) +
                                        " has no child stage");
        }
        path.push_back(n);
        tally_node(*child, branch, path, sink);
        path.pop_back();
    }
}

/// Input states for the root stage: aux * psi_i over 6 + aux modes.
inline StateBundle prepare_inputs(const DominoSet& set, const AuxiliaryPreparation& aux)
{
    StateBundle bundle;
    for (StateLabel label : StateLabel::all()) {
        bundle[label.slot()] = embed_with_aux(std::nullopt, aux, set.state(label));
    }
    return bundle;
}

inline std::string outcome_string(const OutcomeKey& key)
{
    std::ostringstream os;
    bool in_pattern = false;
    bool first = true;
    for (int v : key) {
        if (v == -1) {
            os << (first ? "" : " ") << "count=[";
            in_pattern = true;
            first = true;
            continue;
        }
        if (in_pattern) {
            os << (first ? "" : ",") << v;
        } else {
            os << (first ? "" : " ") << "n=" << v;
        }
        first = false;
    }
    if (in_pattern) {
        os << "]";
    }
    const std::string s = os.str();
    return s.empty() ? "none" : s;
}

}  // namespace detail

struct EvaluationOptions
{
    int depth_limit = kDefaultDepthLimit;
    bool with_confusion = true;
};

/**
 * Propagates every domino state (times the auxiliary preparation) through the
 * cascade and scores the leaf guesses under a uniform prior.
 */
inline DiscriminationReport evaluate_strategy(const CascadeStrategy& strategy, const DominoSet& set,
                                              const AuxiliaryPreparation& aux, const EvaluationOptions& options = {})
{
    const std::size_t modes = kSystemModes + aux.aux_mode_count();
    if (strategy.input_modes() != modes) {
        throw std::invalid_argument("evaluate_strategy: strategy expects " + std::to_string(strategy.input_modes()) +
                                    " modes but states have " + std::to_string(modes));
    }
    if (strategy.depth() > options.depth_limit) {
        throw std::invalid_argument("evaluate_strategy: strategy depth " + std::to_string(strategy.depth()) +
                                    " exceeds limit " + std::to_string(options.depth_limit));
    }
    const detail::StateBundle inputs = detail::prepare_inputs(set, aux);
    std::map<detail::OutcomeKey, detail::OutcomeTally> tally;
    detail::OutcomeKey path;
    detail::tally_node(strategy.root(), inputs, path, tally);

    DiscriminationReport report;
    for (const auto& [key, row] : tally) {
        const StateLabel guess = row.guess.value_or(detail::most_likely(row.probabilities));
        report.per_state_success[guess.slot()] += row.probabilities[guess.slot()];
        if (options.with_confusion) {
            report.confusion.push_back({detail::outcome_string(key), row.probabilities, guess});
        }
    }
    double sum = 0.0;
    for (double p : report.per_state_success) {
        sum += p;
    }
    report.success_probability = sum / static_cast<double>(kStateCount);
    std::sort(report.confusion.begin(), report.confusion.end(),
              [](const OutcomeRow& a, const OutcomeRow& b) { return a.outcome < b.outcome; });
    return report;
}

namespace detail {

inline CascadeNodePtr freeze_node(const CascadeNode& node, const StateBundle& states)
{
    if (const auto* leaf = std::get_if<GuessLeaf>(&node.body)) {
        if (leaf->guess) {
            return make_node(*leaf);
        }
        std::array<double, kStateCount> p{};
        for (std::size_t s = 0; s < kStateCount; ++s) {
            p[s] = vacuum_norm_squared(states[s]);
        }
        return make_node(GuessLeaf{most_likely(p)});
    }
    if (const auto* leaf = std::get_if<CountLeaf>(&node.body)) {
        std::map<Occupation, std::array<double, kStateCount>> table;
        for (std::size_t s = 0; s < kStateCount; ++s) {
            for (const auto& [occ, p] : counting_distribution(leaf->transform.apply(states[s]))) {
                table[occ][s] += p;
            }
        }
        CountLeaf frozen = *leaf;
        for (const auto& [occ, p] : table) {
            frozen.guesses.try_emplace(occ, most_likely(p));
        }
        return make_node(std::move(frozen));
    }
    const auto& stage = std::get<DetectStage>(node.body);
    std::array<std::vector<CreationPolynomial>, kStateCount> split;
    for (std::size_t s = 0; s < kStateCount; ++s) {
        split[s] = split_by_count(stage.transform.apply(states[s]), stage.detected_mode);
    }
    const std::size_t reduced = stage.transform.dimension() - 1;
    auto branch_states = [&](int n) {
        StateBundle branch;
        for (std::size_t s = 0; s < kStateCount; ++s) {
            branch[s] = static_cast<std::size_t>(n) < split[s].size()
                            ? std::sqrt(factorial(n)) * split[s][static_cast<std::size_t>(n)]
                            : CreationPolynomial(reduced);
        }
        return branch;
    };
    DetectStage frozen{stage.transform, stage.detected_mode, {}, stage.fallback};
    for (const auto& [n, child] : stage.children) {
        frozen.children[n] = freeze_node(*child, branch_states(n));
    }
    if (stage.fallback) {
        std::size_t top = 0;
        for (const auto& sp : split) {
            top = std::max(top, sp.size());
        }
        for (std::size_t n = 0; n < top; ++n) {
            if (!stage.children.contains(static_cast<int>(n))) {
                frozen.children[static_cast<int>(n)] = freeze_node(*stage.fallback, branch_states(static_cast<int>(n)));
            }
        }
    }
    return make_node(std::move(frozen));
}

}  // namespace detail

/**
 * Copy of the strategy with every "most likely" guess replaced by the
 * concrete label it selects for this state set and preparation.
 */
inline CascadeStrategy freeze_guesses(const CascadeStrategy& strategy, const DominoSet& set,
                                      const AuxiliaryPreparation& aux)
{
    return CascadeStrategy(detail::freeze_node(strategy.root(), detail::prepare_inputs(set, aux)),
                           strategy.input_modes());
}

}  // namespace domino
