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
 * @file domino.hpp
 * @brief The nine two-photon domino states, their quadratic-form matrices,
 * and the T / S symmetry group acting on them.
 *
 * Mode order is a1, a2, a3, b1, b2, b3 (indices 0..5); auxiliary modes, when
 * present, follow index 5. The states are
 *
 *     psi_0    = a2 b2
 *     psi_+-1  = a1 (b1 +- b2) / sqrt2
 *     psi_+-2  = b1 (a3 +- a2) / sqrt2
 *     psi_+-3  = a3 (b3 +- b2) / sqrt2
 *     psi_+-4  = b3 (a1 +- a2) / sqrt2
 *
 * (creation operators acting on |0>).
 */
#pragma once

#include "domino/fock.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace domino {

namespace mode {
inline constexpr std::size_t a1 = 0;
inline constexpr std::size_t a2 = 1;
inline constexpr std::size_t a3 = 2;
inline constexpr std::size_t b1 = 3;
inline constexpr std::size_t b2 = 4;
inline constexpr std::size_t b3 = 5;
}  // namespace mode

inline constexpr std::size_t kSystemModes = 6;
inline constexpr std::size_t kStateCount = 9;

/// Label of a domino state, an integer in [-4, 4].
class StateLabel
{
public:
    constexpr StateLabel() = default;

    constexpr explicit StateLabel(int index)
        : index_(index)
    {
        if (index < -4 || index > 4) {
            throw std::out_of_range("StateLabel: index must lie in [-4, 4], got " + std::to_string(index));
        }
    }

    /// Position of the label in the ordering -4, ..., 4.
    static constexpr StateLabel from_slot(std::size_t slot) { return StateLabel(static_cast<int>(slot) - 4); }

    static constexpr std::array<StateLabel, kStateCount> all()
    {
        std::array<StateLabel, kStateCount> labels{};
        for (std::size_t s = 0; s < kStateCount; ++s) {
            labels[s] = from_slot(s);
        }
        return labels;
    }

    constexpr int index() const { return index_; }
    constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ + 4); }

    std::string name() const
    {
        if (index_ == 0) {
            return "psi0";
        }
        return std::string("psi") + (index_ > 0 ? "+" : "-") + std::to_string(std::abs(index_));
    }

    constexpr auto operator<=>(const StateLabel&) const = default;

private:
    int index_ = 0;
};

using RealMatrix6 = Eigen::Matrix<double, 6, 6>;

/**
 * Symmetric matrix M with p = A^T M A |0> for a homogeneous degree-two
 * polynomial p: M_kl = M_lk = c_kl / 2 for the coefficient c_kl of A_k A_l
 * (k != l), and M_kk = c_kk.
 */
inline Eigen::MatrixXcd quadratic_form_matrix(const CreationPolynomial& p)
{
    if (!p.is_homogeneous(2)) {
        throw std::invalid_argument("quadratic_form_matrix: polynomial is not homogeneous of degree 2");
    }
    const auto n = static_cast<Eigen::Index>(p.mode_count());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& t : p.terms()) {
        std::array<Eigen::Index, 2> idx{};
        std::size_t found = 0;
        for (std::size_t k = 0; k < p.mode_count(); ++k) {
            for (int e = 0; e < t.monomial[k]; ++e) {
                idx[found++] = static_cast<Eigen::Index>(k);
            }
        }
        if (idx[0] == idx[1]) {
            m(idx[0], idx[0]) += t.amplitude;
        } else {
            m(idx[0], idx[1]) += t.amplitude / 2.0;
            m(idx[1], idx[0]) += t.amplitude / 2.0;
        }
    }
    return m;
}

/// A^T M A |0> = sum_kl M_kl A_k A_l |0>.
inline CreationPolynomial quadratic_form_polynomial(const Eigen::MatrixXcd& m)
{
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("quadratic_form_polynomial: matrix must be square");
    }
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<Term> terms;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const Complex c = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            if (c == Complex{}) {
                continue;
            }
            Monomial mono(n);
            mono.set(k, mono[k] + 1);
            mono.set(l, mono[l] + 1);
            terms.push_back({mono, c});
        }
    }
    return CreationPolynomial(n, std::move(terms));
}

/// The nine states with their real symmetric matrices M^(i).
class DominoSet
{
public:
    DominoSet(std::array<CreationPolynomial, kStateCount> states, std::array<RealMatrix6, kStateCount> matrices)
        : states_(std::move(states))
        , matrices_(std::move(matrices))
    {}

    const CreationPolynomial& state(StateLabel label) const { return states_[label.slot()]; }
    const RealMatrix6& matrix(StateLabel label) const { return matrices_[label.slot()]; }

    /// M^(label) zero-padded to `dimension` modes.
    Eigen::MatrixXcd padded_matrix(StateLabel label, std::size_t dimension) const
    {
        const auto d = static_cast<Eigen::Index>(dimension);
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
        m.topLeftCorner(6, 6) = matrices_[label.slot()].cast<Complex>();
        return m;
    }

    /// The state embedded into `dimension` modes (auxiliary modes empty).
    CreationPolynomial padded_state(StateLabel label, std::size_t dimension) const
    {
        return embed_modes(states_[label.slot()], dimension);
    }

    /// G(i, j) = <psi_i | psi_j>, rows and columns in label order -4..4.
    Eigen::MatrixXcd gram() const
    {
        Eigen::MatrixXcd g(kStateCount, kStateCount);
        for (std::size_t i = 0; i < kStateCount; ++i) {
            for (std::size_t j = 0; j < kStateCount; ++j) {
                g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    vacuum_inner_product(states_[i], states_[j]);
            }
        }
        return g;
    }

private:
    std::array<CreationPolynomial, kStateCount> states_;
    std::array<RealMatrix6, kStateCount> matrices_;
};

inline DominoSet build_domino_set()
{
    const double r = 1.0 / std::sqrt(2.0);
    auto pair = [](std::size_t k, std::size_t l) {
        std::vector<int> e(kSystemModes, 0);
        ++e[k];
        ++e[l];
        return e;
    };
    std::array<CreationPolynomial, kStateCount> states;
    states[StateLabel(0).slot()] = poly_from_terms({{pair(mode::a2, mode::b2), 1.0}});
    for (int sign : {+1, -1}) {
        const double s = sign;
        states[StateLabel(sign * 1).slot()] =
            poly_from_terms({{pair(mode::a1, mode::b1), r}, {pair(mode::a1, mode::b2), s * r}});
        states[StateLabel(sign * 2).slot()] =
            poly_from_terms({{pair(mode::b1, mode::a3), r}, {pair(mode::b1, mode::a2), s * r}});
        states[StateLabel(sign * 3).slot()] =
            poly_from_terms({{pair(mode::a3, mode::b3), r}, {pair(mode::a3, mode::b2), s * r}});
        states[StateLabel(sign * 4).slot()] =
            poly_from_terms({{pair(mode::b3, mode::a1), r}, {pair(mode::b3, mode::a2), s * r}});
    }
    std::array<RealMatrix6, kStateCount> matrices;
    for (std::size_t s = 0; s < kStateCount; ++s) {
        matrices[s] = quadratic_form_matrix(states[s]).real();
    }
    return DominoSet(std::move(states), std::move(matrices));
}

/**
 * A real orthogonal map on the six system modes, written as it acts on
 * single-photon state vectors (column j is the image of mode j).
 */
class SymmetryOp
{
public:
    SymmetryOp(std::string name, RealMatrix6 matrix)
        : name_(std::move(name))
        , matrix_(std::move(matrix))
    {
        const double dev = (matrix_.transpose() * matrix_ - RealMatrix6::Identity()).cwiseAbs().maxCoeff();
        if (dev > kUnitarityTolerance) {
            throw std::invalid_argument("SymmetryOp: matrix is not orthogonal");
        }
    }

    const std::string& name() const { return name_; }
    const RealMatrix6& matrix() const { return matrix_; }

    /// The same map as a substitution unitary for apply_unitary (the transpose).
    ModeUnitary substitution(std::size_t dimension = kSystemModes) const
    {
        return ModeUnitary(Eigen::MatrixXcd(matrix_.transpose().cast<Complex>())).embedded(dimension);
    }

    /// Applies the map to a polynomial whose first six modes are the system modes.
    CreationPolynomial apply(const CreationPolynomial& p) const { return apply_unitary(p, substitution(p.mode_count())); }

    /// (a * b) applies b first, then a.
    friend SymmetryOp operator*(const SymmetryOp& a, const SymmetryOp& b)
    {
        return SymmetryOp(a.name_ + "*" + b.name_, a.matrix_ * b.matrix_);
    }

    SymmetryOp power(int n) const
    {
        if (n < 0) {
            throw std::invalid_argument("SymmetryOp::power: negative exponent");
        }
        RealMatrix6 m = RealMatrix6::Identity();
        for (int i = 0; i < n; ++i) {
            m = matrix_ * m;
        }
        const std::string label = n == 0 ? "1" : n == 1 ? name_ : name_ + "^" + std::to_string(n);
        return SymmetryOp(label, m);
    }

private:
    std::string name_;
    RealMatrix6 matrix_;
};

inline SymmetryOp symmetry_identity()
{
    return SymmetryOp("1", RealMatrix6::Identity());
}

/// a_i -> b_i, b_i -> a_(4-i).
inline SymmetryOp symmetry_T()
{
    RealMatrix6 t;
    t << 0, 0, 0, 0, 0, 1,
         0, 0, 0, 0, 1, 0,
         0, 0, 0, 1, 0, 0,
         1, 0, 0, 0, 0, 0,
         0, 1, 0, 0, 0, 0,
         0, 0, 1, 0, 0, 0;
    return SymmetryOp("T", t);
}

/// Phase pi on a2 and b2.
inline SymmetryOp symmetry_S()
{
    RealMatrix6 s = RealMatrix6::Identity();
    s(1, 1) = -1.0;
    s(4, 4) = -1.0;
    return SymmetryOp("S", s);
}

/// R_+k = T^(k-1), R_-k = S T^(k-1); maps psi_1 onto psi_(+-k).
inline SymmetryOp symmetry_R(int k)
{
    if (k == 0 || k < -4 || k > 4) {
        throw std::invalid_argument("symmetry_R: k must be in {+-1, ..., +-4}; psi_0 is a fixed point");
    }
    const int m = std::abs(k);
    SymmetryOp t_part = m == 1 ? symmetry_identity() : symmetry_T().power(m - 1);
    SymmetryOp r = k > 0 ? t_part : symmetry_S() * t_part;
    return SymmetryOp("R" + std::string(k > 0 ? "+" : "-") + std::to_string(m), r.matrix());
}

struct PermutationEntry
{
    StateLabel image;
    Complex phase;
};

/// Indexed by source slot: op(psi_i) = phase * psi_image.
using StatePermutation = std::array<PermutationEntry, kStateCount>;

class NotInvariantError : public std::runtime_error
{
public:
    NotInvariantError(const std::string& op, StateLabel label)
        : std::runtime_error("symmetry " + op + " maps " + label.name() + " outside the domino set")
        , label_(label)
    {}

    StateLabel label() const { return label_; }

private:
    StateLabel label_;
};

/// Matches each image op(psi_i) to a basis state up to a global phase, to 1e-10.
inline StatePermutation state_permutation(const SymmetryOp& op, const DominoSet& set, double tolerance = 1e-10)
{
    StatePermutation perm{};
    for (StateLabel source : StateLabel::all()) {
        const CreationPolynomial image = op.apply(set.state(source));
        bool matched = false;
        for (StateLabel target : StateLabel::all()) {
            const Complex overlap = vacuum_inner_product(set.state(target), image);
            if (std::abs(std::abs(overlap) - 1.0) > tolerance) {
                continue;
            }
            if (max_abs_difference(image, overlap * set.state(target)) <= tolerance) {
                perm[source.slot()] = {target, overlap};
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw NotInvariantError(op.name(), source);
        }
    }
    return perm;
}

}  // namespace domino
