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
 * @file optics.hpp
 * @brief Beamsplitters, phase shifters, Haar-random unitaries, triangular
 * mesh decomposition, and auxiliary-photon preparation.
 *
 * Every element is a ModeUnitary in the substitution convention of
 * fock.hpp. A beamsplitter on modes (i, j) is the 2x2 block
 *
 *     [[ cos t,            e^{i p} sin t ],
 *      [ -e^{-i p} sin t,  cos t         ]]
 *
 * embedded in the identity; a phase shifter multiplies one diagonal entry by
 * e^{i p}. Element lists are composed in application order, so that
 * applying e_1, e_2, ... in turn equals applying e_1 * e_2 * ... at once.
 */
#pragma once

#include "domino/domino.hpp"
#include "domino/fock.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace domino {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Beamsplitter
{
    std::size_t mode_i = 0;
    std::size_t mode_j = 1;
    double theta = 0.0;  ///< transmissivity angle in [0, pi/2]
    double phi = 0.0;    ///< phase in [0, 2 pi)
};

struct PhaseShifter
{
    std::size_t mode = 0;
    double phase = 0.0;  ///< in [0, 2 pi)
};

using OpticalElement = std::variant<Beamsplitter, PhaseShifter>;

/// Wraps an angle into [0, 2 pi).
inline double wrap_phase(double phase)
{
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    return w >= kTwoPi ? 0.0 : w;
}

inline void validate_element(const OpticalElement& element, std::size_t dimension)
{
    auto check_phase = [](double p, const char* what) {
        if (!(p >= 0.0 && p < kTwoPi)) {
            throw std::invalid_argument(std::string(what) + " must lie in [0, 2pi), got " + std::to_string(p));
        }
    };
    if (const auto* bs = std::get_if<Beamsplitter>(&element)) {
        if (bs->mode_i >= dimension || bs->mode_j >= dimension) {
            throw std::out_of_range("beamsplitter mode index out of range for dimension " + std::to_string(dimension));
        }
        if (bs->mode_i == bs->mode_j) {
            throw std::invalid_argument("beamsplitter modes must be distinct");
        }
        if (!(bs->theta >= 0.0 && bs->theta <= std::numbers::pi / 2.0)) {
            throw std::invalid_argument("beamsplitter theta must lie in [0, pi/2], got " + std::to_string(bs->theta));
        }
        check_phase(bs->phi, "beamsplitter phi");
    } else {
        const auto& ps = std::get<PhaseShifter>(element);
        if (ps.mode >= dimension) {
            throw std::out_of_range("phase shifter mode index out of range for dimension " + std::to_string(dimension));
        }
        check_phase(ps.phase, "phase shifter phase");
    }
}

/// The element's 2x2 (or 1x1) block written into an identity of size `dimension`.
inline Eigen::MatrixXcd element_matrix(const OpticalElement& element, std::size_t dimension)
{
    const auto d = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(d, d);
    if (const auto* bs = std::get_if<Beamsplitter>(&element)) {
        const auto i = static_cast<Eigen::Index>(bs->mode_i);
        const auto j = static_cast<Eigen::Index>(bs->mode_j);
        const double c = std::cos(bs->theta);
        const double s = std::sin(bs->theta);
        const Complex e = std::polar(1.0, bs->phi);
        m(i, i) = c;
        m(i, j) = e * s;
        m(j, i) = -std::conj(e) * s;
        m(j, j) = c;
    } else {
        const auto& ps = std::get<PhaseShifter>(element);
        const auto k = static_cast<Eigen::Index>(ps.mode);
        m(k, k) = std::polar(1.0, ps.phase);
    }
    return m;
}

/// Product of the element matrices in application order.
inline ModeUnitary compose_elements(std::span<const OpticalElement> elements, std::size_t dimension)
{
    if (dimension == 0) {
        throw std::invalid_argument("compose_elements: dimension must be positive");
    }
    const auto d = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
    for (const auto& e : elements) {
        validate_element(e, dimension);
        u = u * element_matrix(e, dimension);
    }
    return ModeUnitary(std::move(u));
}

namespace detail {

inline Complex integer_power(Complex base, int n)
{
    Complex r{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
        r *= base;
    }
    return r;
}

/// Substitution by one beamsplitter, expanding binomials mode pair by pair.
inline void apply_beamsplitter_terms(std::vector<Term>& terms, const Beamsplitter& bs)
{
    const double c = std::cos(bs.theta);
    const double s = std::sin(bs.theta);
    const Complex e = std::polar(1.0, bs.phi);
    // A_i = c Ã_i + e s Ã_j,  A_j = -conj(e) s Ã_i + c Ã_j
    const Complex uii = c;
    const Complex uij = e * s;
    const Complex uji = -std::conj(e) * s;
    const Complex ujj = c;
    static const auto binomial = [](int n, int k) {
        return factorial(n) / (factorial(k) * factorial(n - k));
    };
    std::vector<Term> out;
    out.reserve(terms.size() * 2);
    for (const auto& t : terms) {
        const int p = t.monomial[bs.mode_i];
        const int q = t.monomial[bs.mode_j];
        if (p == 0 && q == 0) {
            out.push_back(t);
            continue;
        }
        for (int a = 0; a <= p; ++a) {
            const Complex fa = binomial(p, a) * integer_power(uii, a) * integer_power(uij, p - a);
            if (fa == Complex{}) {
                continue;
            }
            for (int b = 0; b <= q; ++b) {
                const Complex fb = binomial(q, b) * integer_power(uji, b) * integer_power(ujj, q - b);
                if (fb == Complex{}) {
                    continue;
                }
                Term grown = t;
                grown.amplitude *= fa * fb;
                grown.monomial.set(bs.mode_i, a + b);
                grown.monomial.set(bs.mode_j, p + q - a - b);
                out.push_back(grown);
            }
        }
    }
    canonicalize(out);
    terms.swap(out);
}

}  // namespace detail

/**
 * Applies an element list one element at a time. Equivalent to
 * apply_unitary(p, compose_elements(elements, p.mode_count())) but far
 * cheaper for many-photon polynomials.
 */
inline CreationPolynomial apply_elements(const CreationPolynomial& p, std::span<const OpticalElement> elements)
{
    std::vector<Term> terms(p.terms().begin(), p.terms().end());
    for (const auto& element : elements) {
        validate_element(element, p.mode_count());
        if (const auto* bs = std::get_if<Beamsplitter>(&element)) {
            detail::apply_beamsplitter_terms(terms, *bs);
        } else {
            const auto& ps = std::get<PhaseShifter>(element);
            const Complex e = std::polar(1.0, ps.phase);
            for (auto& t : terms) {
                t.amplitude *= detail::integer_power(e, t.monomial[ps.mode]);
            }
        }
    }
    return CreationPolynomial(p.mode_count(), std::move(terms));
}

/// Haar-random unitary: QR of a seeded complex Gaussian matrix with R's diagonal phases removed.
inline ModeUnitary random_unitary(std::size_t dimension, std::uint64_t seed)
{
    if (dimension == 0) {
        throw std::invalid_argument("random_unitary: dimension must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(2.0));
    const auto d = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd z(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(r, c) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < d; ++k) {
        const Complex diag = r(k, k);
        const Complex phase = std::abs(diag) > 0.0 ? diag / std::abs(diag) : Complex{1.0, 0.0};
        q.col(k) *= phase;
    }
    return ModeUnitary(std::move(q));
}

/**
 * Triangular (Reck-style) decomposition: D(D-1)/2 beamsplitters and D phase
 * shifters whose composition reproduces `u`.
 *
 * Right-multiplying by adjoint beamsplitters nulls row D-1, then row D-2, ...
 * below the diagonal, leaving a diagonal of phases:
 *     U G_1 ... G_m = Phi,  G_k = B_k^dagger  =>  U = Phi B_m ... B_1.
 */
inline std::vector<OpticalElement> decompose_unitary(const ModeUnitary& u)
{
    const std::size_t n = u.dimension();
    Eigen::MatrixXcd work = u.matrix();
    std::vector<Beamsplitter> nulling;
    for (std::size_t row = n; row-- > 1;) {
        for (std::size_t col = 0; col < row; ++col) {
            const auto r = static_cast<Eigen::Index>(row);
            const Complex x = work(r, static_cast<Eigen::Index>(col));
            const Complex y = work(r, r);
            Beamsplitter b{col, row, 0.0, 0.0};
            if (std::abs(x) > 0.0) {
                b.theta = std::atan2(std::abs(x), std::abs(y));
                // need x cos t + y e^{-i phi} sin t = 0 with G = B(t, phi)^dagger
                b.phi = std::abs(y) > 0.0 ? wrap_phase(-std::arg(-x / y)) : wrap_phase(-std::arg(-x));
                if (std::abs(y) == 0.0) {
                    b.theta = std::numbers::pi / 2.0;
                }
            }
            work = work * element_matrix(b, n).adjoint();
            nulling.push_back(b);
        }
    }
    std::vector<OpticalElement> elements;
    elements.reserve(n + nulling.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        elements.emplace_back(PhaseShifter{k, wrap_phase(std::arg(work(kk, kk)))});
    }
    for (auto it = nulling.rbegin(); it != nulling.rend(); ++it) {
        elements.emplace_back(*it);
    }
    return elements;
}

/**
 * Universal mesh over D modes: D phase shifters followed by the D(D-1)/2
 * beamsplitters of the triangular decomposition, on the same mode pairs. A
 * parameter vector of D^2 unconstrained reals maps smoothly onto the mesh;
 * the all-zero vector is the identity.
 */
class MeshParameterization
{
public:
    explicit MeshParameterization(std::size_t dimension)
        : dimension_(dimension)
    {
        for (std::size_t row = dimension; row-- > 1;) {
            for (std::size_t col = 0; col < row; ++col) {
                pairs_.emplace_back(col, row);
            }
        }
    }

    std::size_t dimension() const { return dimension_; }
    std::size_t parameter_count() const { return dimension_ + 2 * pairs_.size(); }

    std::vector<OpticalElement> elements(std::span<const double> params) const
    {
        if (params.size() != parameter_count()) {
            throw std::invalid_argument("MeshParameterization: expected " + std::to_string(parameter_count()) +
                                        " parameters, got " + std::to_string(params.size()));
        }
        std::vector<OpticalElement> out;
        out.reserve(dimension_ + pairs_.size());
        for (std::size_t k = 0; k < dimension_; ++k) {
            out.emplace_back(PhaseShifter{k, wrap_phase(params[k])});
        }
        // beamsplitters in reverse nulling order, matching decompose_unitary
        for (std::size_t b = 0; b < pairs_.size(); ++b) {
            const std::size_t src = pairs_.size() - 1 - b;
            const double x = params[dimension_ + 2 * b];
            const double theta = std::numbers::pi / 4.0 * (1.0 - std::cos(x));
            out.emplace_back(Beamsplitter{pairs_[src].first, pairs_[src].second, theta,
                                          wrap_phase(params[dimension_ + 2 * b + 1])});
        }
        return out;
    }

    ModeUnitary unitary(std::span<const double> params) const
    {
        const auto e = elements(params);
        return compose_elements(e, dimension_);
    }

private:
    std::size_t dimension_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/**
 * Photons prepared in auxiliary modes, stored as a unit-norm polynomial over
 * the auxiliary modes only (index 0 is the first auxiliary mode).
 */
class AuxiliaryPreparation
{
public:
    /// No auxiliary modes: the polynomial is the constant 1.
    AuxiliaryPreparation()
        : polynomial_(CreationPolynomial::constant(0, 1.0))
    {}

    /// `polynomial` lives on the auxiliary modes only; it is normalized here.
    explicit AuxiliaryPreparation(const CreationPolynomial& polynomial)
        : polynomial_(normalized(polynomial))
    {}

    /**
     * From a polynomial written over system + auxiliary modes; throws if it
     * touches any of the first `system_modes` indices.
     */
    static AuxiliaryPreparation from_full_polynomial(const CreationPolynomial& full,
                                                     std::size_t system_modes = kSystemModes)
    {
        if (full.mode_count() < system_modes) {
            throw std::invalid_argument("auxiliary polynomial has fewer modes than the system");
        }
        CreationPolynomial aux = full;
        for (std::size_t k = 0; k < system_modes; ++k) {
            if (degree_in_mode(aux, 0) != 0) {
                throw std::invalid_argument("auxiliary polynomial touches system mode " + std::to_string(k));
            }
            aux = remove_mode(aux, 0);
        }
        return AuxiliaryPreparation(aux);
    }

    /// `photons` photons spread round-robin over `modes` auxiliary modes, as a Fock state.
    static AuxiliaryPreparation fock(std::size_t modes, int photons)
    {
        if (photons < 0) {
            throw std::invalid_argument("AuxiliaryPreparation::fock: negative photon number");
        }
        if (photons > 0 && modes == 0) {
            throw std::invalid_argument("AuxiliaryPreparation::fock: photons need at least one auxiliary mode");
        }
        std::vector<int> e(modes, 0);
        for (int p = 0; p < photons; ++p) {
            ++e[static_cast<std::size_t>(p) % modes];
        }
        return AuxiliaryPreparation(poly_from_terms({{e, 1.0}}, modes));
    }

    std::size_t aux_mode_count() const { return polynomial_.mode_count(); }
    const CreationPolynomial& polynomial() const { return polynomial_; }
    int photon_count() const { return polynomial_.max_total_degree(); }

    /// The preparation placed after `system_modes` system modes.
    CreationPolynomial embedded(std::size_t system_modes = kSystemModes) const
    {
        return embed_modes(polynomial_, system_modes + aux_mode_count(), system_modes);
    }

private:
    CreationPolynomial polynomial_;
};

/**
 * P_aux * P_state over 6 + aux modes, with the system factor optionally
 * passed through `system_unitary` (6x6) first.
 */
inline CreationPolynomial embed_with_aux(const std::optional<ModeUnitary>& system_unitary,
                                         const AuxiliaryPreparation& aux, const CreationPolynomial& state)
{
    if (state.mode_count() != kSystemModes) {
        throw std::invalid_argument("embed_with_aux: state must live on the six system modes");
    }
    const CreationPolynomial sys = system_unitary ? apply_unitary(state, *system_unitary) : state;
    const std::size_t total = kSystemModes + aux.aux_mode_count();
    if (aux.aux_mode_count() == 0) {
        return sys;
    }
    return poly_multiply(aux.embedded(), embed_modes(sys, total));
}

}  // namespace domino
