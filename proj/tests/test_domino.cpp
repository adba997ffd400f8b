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
#include "domino/optics.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using domino::Complex;
using domino::Monomial;
using domino::StateLabel;
namespace mode = domino::mode;

Monomial pair(std::size_t j, std::size_t k)
{
    std::vector<int> e(6, 0);
    ++e[j];
    ++e[k];
    return Monomial::from_exponents(e);
}

TEST(StateLabel, RangeAndNames)
{
    EXPECT_THROW(StateLabel(5), std::out_of_range);
    EXPECT_THROW(StateLabel(-5), std::out_of_range);
    EXPECT_EQ(StateLabel(0).name(), "psi0");
    EXPECT_EQ(StateLabel(3).name(), "psi+3");
    EXPECT_EQ(StateLabel(-2).name(), "psi-2");
    EXPECT_EQ(StateLabel::from_slot(StateLabel(-4).slot()), StateLabel(-4));
    EXPECT_EQ(StateLabel::all().size(), 9u);
}

TEST(DominoSet, ExplicitMonomials)
{
    const auto set = domino::build_domino_set();
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_EQ(set.state(StateLabel(0)).coefficient(pair(mode::a2, mode::b2)), Complex(1.0));
    // psi(+-1) = a1 (b1 +- b2) / sqrt2
    EXPECT_NEAR(set.state(StateLabel(1)).coefficient(pair(mode::a1, mode::b2)).real(), h, 1e-15);
    EXPECT_NEAR(set.state(StateLabel(-1)).coefficient(pair(mode::a1, mode::b2)).real(), -h, 1e-15);
    // psi(+-2) = b1 (a3 +- a2) / sqrt2
    EXPECT_NEAR(set.state(StateLabel(-2)).coefficient(pair(mode::a2, mode::b1)).real(), -h, 1e-15);
    // psi(+-3) = a3 (b3 +- b2) / sqrt2
    EXPECT_NEAR(set.state(StateLabel(3)).coefficient(pair(mode::a3, mode::b3)).real(), h, 1e-15);
    // psi(+-4) = b3 (a1 +- a2) / sqrt2
    EXPECT_NEAR(set.state(StateLabel(-4)).coefficient(pair(mode::a2, mode::b3)).real(), -h, 1e-15);
    for (auto label : StateLabel::all()) {
        EXPECT_TRUE(set.state(label).is_homogeneous(2));
    }
}

TEST(DominoSet, GramIsIdentity)
{
    const auto set = domino::build_domino_set();
    const double dev = (set.gram() - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff();
    EXPECT_LT(dev, 1e-12);
}

TEST(DominoSet, QuadraticFormsAreHalfCoefficients)
{
    const auto set = domino::build_domino_set();
    const auto& m0 = set.matrix(StateLabel(0));
    EXPECT_DOUBLE_EQ(m0(mode::a2, mode::b2), 0.5);
    EXPECT_DOUBLE_EQ(m0(mode::b2, mode::a2), 0.5);
    for (auto label : StateLabel::all()) {
        const auto& m = set.matrix(label);
        EXPECT_EQ(m, m.transpose());
        const auto back = domino::quadratic_form_polynomial(m.cast<Complex>());
        EXPECT_LT(domino::max_abs_difference(back, set.state(label)), 1e-15);
    }
}

TEST(Symmetry, TableOfT)
{
    const auto set = domino::build_domino_set();
    const auto perm = domino::state_permutation(domino::symmetry_T(), set);
    const int expected[9][2] = {{0, 0}, {1, 2}, {2, 3}, {3, 4}, {4, 1}, {-1, -2}, {-2, -3}, {-3, -4}, {-4, -1}};
    for (const auto& row : expected) {
        EXPECT_EQ(perm[StateLabel(row[0]).slot()].image, StateLabel(row[1])) << "source " << row[0];
        EXPECT_NEAR(std::abs(perm[StateLabel(row[0]).slot()].phase), 1.0, 1e-12);
    }
}

TEST(Symmetry, TableOfS)
{
    const auto set = domino::build_domino_set();
    const auto perm = domino::state_permutation(domino::symmetry_S(), set);
    for (auto label : StateLabel::all()) {
        EXPECT_EQ(perm[label.slot()].image, StateLabel(-label.index()));
    }
}

TEST(Symmetry, GroupRelations)
{
    const auto t = domino::symmetry_T();
    const auto s = domino::symmetry_S();
    EXPECT_EQ(t.power(4).matrix(), domino::RealMatrix6::Identity());
    EXPECT_NE(t.power(2).matrix(), domino::RealMatrix6::Identity());
    EXPECT_EQ((s * s).matrix(), domino::RealMatrix6::Identity());
    EXPECT_EQ((s * t).matrix(), (t * s).matrix());
}

TEST(Symmetry, RMapsPsiOneEverywhere)
{
    const auto set = domino::build_domino_set();
    for (int k : {-4, -3, -2, -1, 1, 2, 3, 4}) {
        const auto perm = domino::state_permutation(domino::symmetry_R(k), set);
        EXPECT_EQ(perm[StateLabel(1).slot()].image, StateLabel(k)) << "k = " << k;
        EXPECT_EQ(perm[StateLabel(0).slot()].image, StateLabel(0));
    }
    EXPECT_THROW(domino::symmetry_R(0), std::invalid_argument);
    EXPECT_THROW(domino::symmetry_R(5), std::invalid_argument);
}

TEST(Symmetry, NonSymmetryIsRejected)
{
    domino::RealMatrix6 swap = domino::RealMatrix6::Identity();
    swap(0, 0) = swap(1, 1) = 0.0;
    swap(0, 1) = swap(1, 0) = 1.0;
    const domino::SymmetryOp op("swap(a1,a2)", swap);
    EXPECT_THROW(domino::state_permutation(op, domino::build_domino_set()), domino::NotInvariantError);

    domino::RealMatrix6 scaled = 2.0 * domino::RealMatrix6::Identity();
    EXPECT_THROW(domino::SymmetryOp("scale", scaled), std::invalid_argument);
}

TEST(Symmetry, ActionMatchesSubstitution)
{
    const auto set = domino::build_domino_set();
    const auto t = domino::symmetry_T();
    for (auto label : StateLabel::all()) {
        const auto direct = t.apply(set.state(label));
        const auto via = domino::apply_unitary(set.state(label), t.substitution());
        EXPECT_LT(domino::max_abs_difference(direct, via), 1e-15);
    }
}

}  // namespace
