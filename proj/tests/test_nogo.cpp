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

#include "domino/nogo.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

namespace {

using domino::Complex;
using domino::ModeUnitary;
using domino::StateLabel;
using domino::SystemVector;
namespace mode = domino::mode;

const domino::DominoSet& states()
{
    static const domino::DominoSet set = domino::build_domino_set();
    return set;
}

ModeUnitary hom_a2_b2(std::size_t dim = 6)
{
    const std::vector<domino::OpticalElement> e = {domino::PhaseShifter{mode::b2, std::numbers::pi},
                                                   domino::Beamsplitter{mode::a2, mode::b2, std::numbers::pi / 4.0, 0.0}};
    return domino::compose_elements(e, dim);
}

TEST(Ns, Examples)
{
    EXPECT_EQ(domino::compute_ns(ModeUnitary::identity(6), mode::a2, states()).n_s, 1);
    const auto hom = domino::compute_ns(hom_a2_b2(), mode::a2, states());
    EXPECT_EQ(hom.n_s, 2);
    EXPECT_EQ(hom.per_state_degrees[StateLabel(0).slot()], 2);
    // an auxiliary output fed only by auxiliary vacuum
    EXPECT_EQ(domino::compute_ns(ModeUnitary::identity(7), 6, states()).n_s, 0);
    EXPECT_THROW(domino::compute_ns(ModeUnitary::identity(6), 6, states()), std::out_of_range);
}

TEST(Ns, TwoOnlyWithNonzeroDiagonal)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto u = domino::random_unitary(7, seed);
        const std::size_t d = seed % 7;
        const auto ns = domino::compute_ns(u, d, states());
        bool any_diagonal = false;
        for (auto label : StateLabel::all()) {
            any_diagonal = any_diagonal || std::abs(domino::transformed_matrix(u, states(), label)(d, d)) > 1e-12;
        }
        EXPECT_EQ(ns.n_s == 2, any_diagonal);
    }
}

TEST(Residuals, IdentityDetectingA2)
{
    const auto r = domino::condition_residuals(ModeUnitary::identity(6), mode::a2, states());
    EXPECT_EQ(r.n_s, 1);
    EXPECT_FALSE(r.degenerate);
    EXPECT_EQ(r.pairs.size(), 36u);
    EXPECT_NEAR(r.pair(StateLabel(2), StateLabel(-2)).top, 0.5, 1e-15);
    EXPECT_NEAR(r.pair(StateLabel(0), StateLabel(1)).top, 0.0, 1e-15);
    EXPECT_EQ(r.pair(StateLabel(-2), StateLabel(2)).top, r.pair(StateLabel(2), StateLabel(-2)).top);
    EXPECT_THROW(r.pair(StateLabel(1), StateLabel(1)), std::invalid_argument);
    ASSERT_TRUE(r.pair(StateLabel(2), StateLabel(-2)).top_minus_one.has_value());
}

TEST(Residuals, DegenerateWhenDecoupled)
{
    const auto r = domino::condition_residuals(ModeUnitary::identity(7), 6, states());
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(r.pairs.empty());
    EXPECT_THROW(r.pair(StateLabel(1), StateLabel(2)), std::out_of_range);
}

TEST(Residuals, NoRandomUnitaryZeroesAllConditions)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = domino::condition_residuals(domino::random_unitary(6, 77 + seed), seed % 6, states());
        EXPECT_GT(r.max_residual(), 1e-3);
    }
}

TEST(MMatrix, TransformedMatrixReproducesApplyUnitary)
{
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto u = domino::random_unitary(6 + seed % 3, 500 + seed);
        for (auto label : StateLabel::all()) {
            const auto via_matrix = domino::quadratic_form_polynomial(domino::transformed_matrix(u, states(), label));
            const auto direct = domino::apply_unitary(states().padded_state(label, u.dimension()), u);
            EXPECT_LT(domino::max_abs_difference(via_matrix, direct), 1e-10);
        }
    }
}

TEST(MMatrix, DiagonalAndConditionalVector)
{
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto u = domino::random_unitary(6 + seed % 3, 900 + seed);
        const std::size_t d = seed % u.dimension();
        const SystemVector c0 = domino::detected_column(u, d);
        for (auto label : StateLabel::all()) {
            const auto out = domino::apply_unitary(states().padded_state(label, u.dimension()), u);
            // M~_dd is the coefficient of (d^dag)^2
            const auto top = domino::coefficient_of_power(out, d, 2);
            const Complex from_poly = top.is_zero() ? Complex{} : top.terms()[0].amplitude;
            EXPECT_NEAR(std::abs(domino::m_dd(c0, states(), label) - from_poly), 0.0, 1e-12);
            // the N = 1 conditional state is 2 sum_{k != d} M~_dk e_k^dag |0>
            const auto cond = domino::remove_mode(domino::coefficient_of_power(out, d, 1), d);
            const Eigen::VectorXcd v = domino::m_vector(u, d, states(), label);
            for (Eigen::Index k = 0; k < v.size(); ++k) {
                std::vector<int> e(u.dimension() - 1, 0);
                e[static_cast<std::size_t>(k)] = 1;
                EXPECT_NEAR(std::abs(cond.coefficient(domino::Monomial::from_exponents(e)) - 2.0 * v(k)), 0.0, 1e-12);
            }
        }
    }
}

TEST(C0System, EliminationMatchesFullUnitaries)
{
    // the c0-only objective equals the residuals of any unitary whose detected column is c0
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 6 + static_cast<std::size_t>(trial % 3);
        const auto u = domino::random_unitary(dim, rng());
        const std::size_t d = static_cast<std::size_t>(trial) % dim;
        const SystemVector c0 = domino::detected_column(u, d);
        for (int i0 : {0, 1}) {
            const auto r = domino::i0_residuals(u, d, states(), StateLabel(i0));
            double expected = 0.0;
            for (double x : r.diagonal) {
                expected += x * x;
            }
            for (double x : r.overlaps) {
                expected += x * x;
            }
            EXPECT_NEAR(domino::c0_objective(c0, states(), StateLabel(i0)), expected, 1e-12);
        }
    }
}

TEST(C0System, CompletionKeepsTheColumn)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        SystemVector c;
        for (Eigen::Index k = 0; k < 6; ++k) {
            c(k) = Complex(g(rng), g(rng));
        }
        c.normalize();
        const auto u = domino::complete_to_unitary(c, 6 + static_cast<std::size_t>(trial % 3));
        EXPECT_LT((domino::detected_column(u, 0) - c).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(domino::complete_to_unitary(SystemVector::Zero()), std::invalid_argument);
}

TEST(C0System, ForcedFormForLabelZero)
{
    // c0 = (0, u1, 0, 0, u4, 0): every M~_00 except psi0 vanishes, the +-k pairs survive
    const Complex u1(0.6, 0.2);
    const Complex u4(0.3, -0.5);
    SystemVector c;
    c << 0.0, u1, 0.0, 0.0, u4, 0.0;
    c.normalize();
    const double a1 = std::norm(c(1));
    const double a4 = std::norm(c(4));
    const auto t = domino::c0_terms(c, states());
    for (auto label : StateLabel::all()) {
        if (label != StateLabel(0)) {
            EXPECT_NEAR(std::abs(t.diagonal[label.slot()]), 0.0, 1e-15) << label.name();
        }
    }
    auto overlap = [&](int k) { return std::abs(t.overlaps[StateLabel(k).slot()][StateLabel(-k).slot()]); };
    EXPECT_NEAR(overlap(1), a4 / 8.0, 1e-14);
    EXPECT_NEAR(overlap(2), a1 / 8.0, 1e-14);
    EXPECT_NEAR(overlap(3), a4 / 8.0, 1e-14);
    EXPECT_NEAR(overlap(4), a1 / 8.0, 1e-14);
    // the best such c0 has |u1| = |u4|: floor 1/64
    SystemVector balanced;
    balanced << 0.0, 1.0, 0.0, 0.0, 1.0, 0.0;
    balanced.normalize();
    EXPECT_NEAR(domino::c0_objective(balanced, states(), StateLabel(0)), 1.0 / 64.0, 1e-15);
}

TEST(C0System, ForcedFormForLabelOne)
{
    const Complex u0(0.7, 0.1);
    const Complex u(0.2, 0.4);
    SystemVector c;
    c << u0, 0.0, 0.0, u, u, 0.0;
    c.normalize();
    const auto t = domino::c0_terms(c, states());
    for (auto label : StateLabel::all()) {
        if (label != StateLabel(1)) {
            EXPECT_NEAR(std::abs(t.diagonal[label.slot()]), 0.0, 1e-15) << label.name();
        }
    }
    auto overlap = [&](int k) { return std::abs(t.overlaps[StateLabel(k).slot()][StateLabel(-k).slot()]); };
    EXPECT_NEAR(overlap(4), std::norm(c(0)) / 8.0, 1e-14);
    EXPECT_NEAR(overlap(3), std::norm(c(3)) / 8.0, 1e-14);
    EXPECT_GT(domino::c0_objective(c, states(), StateLabel(1)), 1e-4);
}

TEST(MMatrix, ConsistencyCheckOverRandomUnitaries)
{
    const auto c = domino::check_m_matrix_consistency(12, 5, domino::build_domino_set());
    EXPECT_EQ(c.trials, 12);
    EXPECT_LT(c.max_deviation(), 1e-12);
    EXPECT_EQ(domino::check_m_matrix_consistency(0, 5, domino::build_domino_set()).max_deviation(), 0.0);
}

TEST(C0System, ForcedFormCheckReportsSurvivingPairs)
{
    const auto r = domino::check_forced_forms(domino::build_domino_set());
    EXPECT_LT(r.max_deviation, 1e-15);
    EXPECT_GT(r.min_surviving, 1e-3);
    EXPECT_NEAR(r.zero.norm(), 1.0, 1e-15);
    EXPECT_NEAR(r.pair(true, 4), std::norm(r.one(0)) / 8.0, 1e-15);
}

TEST(C0Certificate, FloorsAreStable)
{
    const auto zero = domino::certify_c0_infeasibility(StateLabel(0), 12, 5, states());
    const auto one = domino::certify_c0_infeasibility(StateLabel(1), 12, 5, states());
    EXPECT_TRUE(zero.passed());
    EXPECT_TRUE(one.passed());
    EXPECT_NEAR(zero.residual_at_unit_norm, 1.0 / 64.0, 1e-6);
    EXPECT_NEAR(one.residual_at_unit_norm, 0.010814830409, 1e-6);
    EXPECT_NEAR(zero.best_c0.norm(), 1.0, 1e-12);
    EXPECT_EQ(zero.restart_minima.size(), 12u);
    EXPECT_THROW(domino::certify_c0_infeasibility(StateLabel(2), 5, 1, states()), std::invalid_argument);
    EXPECT_THROW(domino::certify_c0_infeasibility(StateLabel(0), 0, 1, states()), std::invalid_argument);
}

TEST(C0Certificate, DeterministicPerSeed)
{
    const auto a = domino::certify_c0_infeasibility(StateLabel(1), 4, 9, states());
    const auto b = domino::certify_c0_infeasibility(StateLabel(1), 4, 9, states());
    EXPECT_EQ(a.restart_minima, b.restart_minima);
}

TEST(SymmetryReduction, ResidualMultisetsAreMapped)
{
    for (int k : {-4, -3, -2, -1, 2, 3, 4}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto u = domino::random_unitary(6 + seed, 40 * static_cast<std::uint64_t>(k + 5) + seed);
            const auto rec = domino::reduce_by_symmetry(StateLabel(k), u, seed, states());
            EXPECT_LT(rec.max_deviation, 1e-10) << "k = " << k;
        }
    }
    const auto u = domino::random_unitary(6, 1);
    const auto same = domino::reduce_by_symmetry(StateLabel(1), u, 0, states());
    EXPECT_LT((same.reduced.matrix() - u.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(domino::reduce_by_symmetry(StateLabel(0), u, 0, states()), std::invalid_argument);
}

TEST(AuxFactorization, VacuumPreparationIsTheBareIdentity)
{
    const domino::AuxiliaryPreparation none;
    const auto rep = domino::verify_aux_factorization(none, domino::random_unitary(6, 2), 1, states());
    EXPECT_EQ(rep.n_a, 0);
    EXPECT_NEAR(rep.aux_top_norm, 1.0, 1e-15);
    EXPECT_LT(rep.max_deviation(), 1e-12);
}

TEST(AuxFactorization, SinglePhotonSevenModes)
{
    const auto aux = domino::AuxiliaryPreparation::fock(1, 1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto rep = domino::verify_aux_factorization(aux, domino::random_unitary(7, 60 + seed), seed, states());
        EXPECT_EQ(rep.n_a, 1);
        EXPECT_TRUE(rep.second_checked);
        EXPECT_LT(rep.max_deviation(), 1e-8);
        EXPECT_NEAR(std::abs(rep.fitted_top - rep.closed_form_top), 0.0, 1e-8);
        EXPECT_NEAR(std::abs(rep.fitted_below - rep.closed_form_below), 0.0, 1e-8);
    }
}

TEST(AuxFactorization, TwoModeSuperpositionEightModes)
{
    // (c1^dag)^2 + c1^dag c2^dag, normalized
    const auto p = domino::poly_from_terms({{{2, 0}, Complex(1.0)}, {{1, 1}, Complex(1.0)}}, 2);
    const domino::AuxiliaryPreparation aux(p);
    const auto rep = domino::verify_aux_factorization(aux, domino::random_unitary(8, 71), 3, states());
    EXPECT_EQ(rep.n_a, 2);
    EXPECT_LT(rep.max_deviation(), 1e-8);
}

TEST(AuxFactorization, RandomTrials)
{
    domino::AuxTrialConfig config;
    config.trials = 25;
    config.seed = 4;
    const auto summary = domino::run_aux_factorization_trials(config, states());
    EXPECT_EQ(summary.trials, 25);
    EXPECT_LT(summary.max_deviation, 1e-8);
    EXPECT_THROW(domino::verify_aux_factorization(domino::AuxiliaryPreparation::fock(1, 1), domino::random_unitary(6, 1),
                                                  0, states()),
                 std::invalid_argument);
}

TEST(Optimizer, IdentityBaselineAndDeterminism)
{
    domino::OptimizerConfig config;
    config.restarts = 3;
    config.max_evaluations_per_restart = 300;
    config.seed = 13;
    const auto a = domino::optimize_discrimination(config, states());
    EXPECT_GE(a.report.success_probability, 5.0 / 9.0 - 1e-12);
    EXPECT_LT(a.report.success_probability, 0.999);
    EXPECT_FALSE(a.budget_exhausted);
    ASSERT_EQ(a.trace.size(), 3u);
    const auto b = domino::optimize_discrimination(config, states());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        EXPECT_EQ(a.trace[k].best_value, b.trace[k].best_value);
        EXPECT_EQ(a.trace[k].evaluations, b.trace[k].evaluations);
    }
    // the frozen strategy scores the reported value
    const domino::AuxiliaryPreparation none;
    EXPECT_NEAR(domino::evaluate_strategy(a.best, states(), none).success_probability, a.report.success_probability,
                1e-15);
}

TEST(Optimizer, DeeperLevelsNeverLoseGround)
{
    domino::OptimizerConfig config;
    config.depth = 2;
    config.restarts = 2;
    config.max_evaluations_per_restart = 200;
    config.seed = 2;
    const auto r = domino::optimize_discrimination(config, states());
    double level_one = 0.0;
    for (const auto& t : r.trace) {
        if (t.level == 1) {
            level_one = std::max(level_one, t.best_value);
        }
    }
    EXPECT_GE(r.report.success_probability, level_one - 1e-12);
    EXPECT_EQ(r.best.depth(), 2);
}

TEST(Optimizer, DeepeningPreservesTheScore)
{
    const std::size_t modes = 7;
    const domino::CascadeSearchSpace shallow(modes, 3, 1);
    const domino::CascadeSearchSpace deep(modes, 3, 2);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::vector<double> x(shallow.parameter_count());
    for (auto& v : x) {
        v = angle(rng);
    }
    const auto aux = domino::AuxiliaryPreparation::fock(1, 1);
    const auto lifted = deep.deepen(x);
    ASSERT_EQ(lifted.size(), deep.parameter_count());
    EXPECT_NEAR(domino::evaluate_strategy(shallow.strategy(x), states(), aux).success_probability,
                domino::evaluate_strategy(deep.strategy(lifted), states(), aux).success_probability, 1e-12);
}

TEST(Optimizer, BudgetAndValidation)
{
    domino::OptimizerConfig config;
    config.restarts = 5;
    config.max_evaluations_per_restart = 50;
    config.max_total_evaluations = 60;
    const auto r = domino::optimize_discrimination(config, states());
    EXPECT_TRUE(r.budget_exhausted);
    EXPECT_GE(r.report.success_probability, 5.0 / 9.0 - 1e-12);

    domino::OptimizerConfig bad;
    bad.depth = 4;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = {};
    bad.aux_photons = 5;
    bad.aux_modes = 1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = {};
    bad.aux_modes = 7;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = {};
    bad.aux_photons = 1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
