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

#include "domino/domino.hpp"
#include "domino/measure.hpp"
#include "domino/optics.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using domino::CascadeStrategy;
using domino::StageTransform;
using domino::StateLabel;

const domino::DominoSet& states()
{
    static const domino::DominoSet set = domino::build_domino_set();
    return set;
}

TEST(ConditionalState, ProbabilitiesSumToOne)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto u = domino::random_unitary(6, seed);
        for (auto label : StateLabel::all()) {
            double total = 0.0;
            for (int n = 0; n <= 2; ++n) {
                const auto c = domino::conditional_state(states().state(label), u, seed % 6, n);
                EXPECT_EQ(c.state.mode_count(), 5u);
                total += c.probability;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(ConditionalState, IdentityDetectionOfA2)
{
    // psi(+-2) = b1 (a3 +- a2)/sqrt2: one photon in a2 with probability 1/2
    const auto c = domino::conditional_state(states().state(StateLabel(2)), domino::ModeUnitary::identity(6),
                                             domino::mode::a2, 1);
    EXPECT_NEAR(c.probability, 0.5, 1e-15);
    EXPECT_THROW(domino::conditional_state(states().state(StateLabel(2)), domino::ModeUnitary::identity(6), 9, 1),
                 std::out_of_range);
    EXPECT_THROW(domino::conditional_state(2.0 * states().state(StateLabel(2)), domino::ModeUnitary::identity(6), 0, 1),
                 std::invalid_argument);
}

TEST(Distribution, SumsToOneAndPlusMinusPairsCoincide)
{
    const auto id = domino::ModeUnitary::identity(6);
    for (auto label : StateLabel::all()) {
        double total = 0.0;
        for (const auto& [occ, p] : domino::outcome_distribution(states().state(label), id)) {
            total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-14);
    }
    for (int k = 1; k <= 4; ++k) {
        const auto plus = domino::outcome_distribution(states().state(StateLabel(k)), id);
        const auto minus = domino::outcome_distribution(states().state(StateLabel(-k)), id);
        ASSERT_EQ(plus.size(), minus.size());
        for (const auto& [occ, p] : plus) {
            ASSERT_TRUE(minus.contains(occ));
            EXPECT_NEAR(p, minus.at(occ), 1e-14);
        }
    }
}

TEST(Discrimination, DirectCountingBaselineIsFiveNinths)
{
    // Outcome patterns of the identity: psi0 alone on (a2,b2); each +-k pair
    // shares two patterns with probability 1/2 each, so every pair
    // contributes 1 and psi0 contributes 1: (1 + 4) / 9.
    const domino::AuxiliaryPreparation none;
    const auto report = domino::evaluate_strategy(CascadeStrategy::full_count(StageTransform::identity(6)), states(), none);
    EXPECT_NEAR(report.success_probability, 5.0 / 9.0, 1e-12);
    EXPECT_NEAR(report.per_state_success[StateLabel(0).slot()], 1.0, 1e-12);

    std::vector<domino::OutcomeDistribution> dists;
    for (auto label : StateLabel::all()) {
        dists.push_back(domino::outcome_distribution(states().state(label), domino::ModeUnitary::identity(6)));
    }
    EXPECT_NEAR(domino::optimal_guess_success(dists), 5.0 / 9.0, 1e-12);
}

TEST(Discrimination, GuessOnlyIsOneNinth)
{
    const domino::AuxiliaryPreparation none;
    const auto report = domino::evaluate_strategy(CascadeStrategy::guess_only(StateLabel(3), 6), states(), none);
    EXPECT_NEAR(report.success_probability, 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(report.per_state_success[StateLabel(3).slot()], 1.0, 1e-15);
}

TEST(Discrimination, OptimalGuessingMatchesClosedForm)
{
    const domino::AuxiliaryPreparation none;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto u = domino::random_unitary(6, 300 + seed);
        std::vector<domino::OutcomeDistribution> dists;
        for (auto label : StateLabel::all()) {
            dists.push_back(domino::outcome_distribution(states().state(label), u));
        }
        const auto report = domino::evaluate_strategy(CascadeStrategy::full_count(StageTransform(u)), states(), none);
        EXPECT_NEAR(report.success_probability, domino::optimal_guess_success(dists), 1e-12);
    }
}

TEST(Cascade, DetectThenCountEqualsCountAll)
{
    // Detecting one mode and counting the rest unchanged is the same measurement as counting everything.
    const domino::AuxiliaryPreparation aux = domino::AuxiliaryPreparation::fock(1, 1);
    const auto u = domino::random_unitary(7, 17);
    domino::DetectStage stage{StageTransform(u), 3, {}, domino::make_node(domino::CountLeaf{StageTransform::identity(6), {}})};
    const CascadeStrategy cascade(domino::make_node(std::move(stage)), 7);
    EXPECT_EQ(cascade.depth(), 2);
    const auto flat = domino::evaluate_strategy(CascadeStrategy::full_count(StageTransform(u)), states(), aux);
    const auto deep = domino::evaluate_strategy(cascade, states(), aux);
    EXPECT_NEAR(flat.success_probability, deep.success_probability, 1e-12);
    double total = 0.0;
    for (const auto& row : deep.confusion) {
        total += row.probabilities[StateLabel(1).slot()];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Cascade, StructuralErrors)
{
    const domino::AuxiliaryPreparation none;
    EXPECT_THROW(CascadeStrategy(nullptr, 6), std::invalid_argument);
    // wrong dimension for the inputs
    EXPECT_THROW(domino::evaluate_strategy(CascadeStrategy::full_count(StageTransform::identity(7)), states(), none),
                 std::invalid_argument);
    // a reachable count without a child
    domino::DetectStage stage{StageTransform::identity(6), 0, {}, nullptr};
    stage.children[0] = domino::make_node(domino::GuessLeaf{});
    const CascadeStrategy partial(domino::make_node(std::move(stage)), 6);
    EXPECT_THROW(domino::evaluate_strategy(partial, states(), none), std::invalid_argument);
    // child stage of the wrong size
    domino::DetectStage bad{StageTransform::identity(6), 0, {}, domino::make_node(domino::CountLeaf{StageTransform::identity(6), {}})};
    EXPECT_THROW(CascadeStrategy(domino::make_node(std::move(bad)), 6), std::invalid_argument);
}

TEST(Cascade, DepthLimitEnforced)
{
    domino::CascadeNodePtr node = domino::make_node(domino::CountLeaf{StageTransform::identity(2), {}});
    for (std::size_t modes = 3; modes <= 6; ++modes) {
        node = domino::make_node(domino::DetectStage{StageTransform::identity(modes), 0, {}, node});
    }
    const CascadeStrategy deep(node, 6);
    EXPECT_EQ(deep.depth(), 5);
    const domino::AuxiliaryPreparation none;
    EXPECT_THROW(domino::evaluate_strategy(deep, states(), none), std::invalid_argument);
    domino::EvaluationOptions options;
    options.depth_limit = 5;
    EXPECT_NEAR(domino::evaluate_strategy(deep, states(), none, options).success_probability, 5.0 / 9.0, 1e-12);
}

TEST(Cascade, FrozenGuessesKeepTheScore)
{
    const auto aux = domino::AuxiliaryPreparation::fock(1, 1);
    const auto u = domino::random_unitary(7, 23);
    domino::DetectStage stage{StageTransform(u), 0, {}, nullptr};
    for (int n = 0; n <= 3; ++n) {
        stage.children[n] = domino::make_node(domino::CountLeaf{StageTransform(domino::random_unitary(6, 50 + n)), {}});
    }
    const CascadeStrategy open(domino::make_node(std::move(stage)), 7);
    const auto frozen = domino::freeze_guesses(open, states(), aux);
    EXPECT_NEAR(domino::evaluate_strategy(open, states(), aux).success_probability,
                domino::evaluate_strategy(frozen, states(), aux).success_probability, 1e-15);
}

TEST(StageTransform, BothRoutesAgree)
{
    const auto u = domino::random_unitary(8, 4);
    const StageTransform t(u);
    const auto aux = domino::AuxiliaryPreparation::fock(2, 2);
    const auto input = domino::embed_with_aux(std::nullopt, aux, states().state(StateLabel(-3)));
    const auto dense = domino::apply_unitary(input, domino::random_unitary(8, 5));
    EXPECT_LT(domino::max_abs_difference(t.apply(input), domino::apply_unitary(input, u)), 1e-12);
    EXPECT_LT(domino::max_abs_difference(t.apply(dense), domino::apply_elements(dense, t.elements())), 1e-12);
    EXPECT_LT(domino::max_abs_difference(t.apply(dense), domino::apply_unitary(dense, u)), 1e-12);
}

}  // namespace
