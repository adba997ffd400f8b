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
 * @file fock.hpp
 * @brief Polynomials in bosonic creation operators acting on the vacuum.
 *
 * A state with a finite number of photons is stored as a sparse polynomial
 * P(A_0, ..., A_{n-1}) in commuting creation operators, so that the state is
 * P|0>. Monomials are dense exponent vectors; the occupation vector of the
 * Fock state a monomial creates is its exponent vector, with norm
 * sqrt(prod_k n_k!).
 *
 * Unitary convention: a mode unitary U relates input and output creation
 * operators by A = U * Ã, i.e. every input operator A_k is replaced by
 * sum_j U(k, j) Ã_j. With this convention a quadratic form A^T M A becomes
 * Ã^T (U^T M U) Ã without any transpose juggling. Note that a single photon
 * entering mode k leaves with amplitudes given by ROW k of U; a matrix
 * written as a map on single-photon state vectors (v -> R v) must be passed
 * here as its transpose.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace domino {

using Complex = std::complex<double>;

/// Amplitudes below this magnitude are dropped after every arithmetic step.
inline constexpr double kPruneTolerance = 1e-14;

/// Tolerance on max|U^dagger U - I| accepted by ModeUnitary.
inline constexpr double kUnitarityTolerance = 1e-12;

/// Monomials are fixed-capacity exponent arrays; mode counts in this
/// problem stay well below this bound (6 system modes + auxiliaries).
inline constexpr std::size_t kMaxModes = 16;

namespace detail {

inline constexpr std::array<double, 41> make_factorials()
{
    std::array<double, 41> f{};
    f[0] = 1.0;
    for (std::size_t n = 1; n < f.size(); ++n) {
        f[n] = f[n - 1] * static_cast<double>(n);
    }
    return f;
}

inline constexpr std::array<double, 41> kFactorials = make_factorials();

}  // namespace detail

inline double factorial(int n)
{
    if (n < 0 || static_cast<std::size_t>(n) >= detail::kFactorials.size()) {
        throw std::out_of_range("factorial argument out of table range: " + std::to_string(n));
    }
    return detail::kFactorials[static_cast<std::size_t>(n)];
}

/// Exponent vector of a product of creation operators.
class Monomial
{
public:
    Monomial() = default;

    explicit Monomial(std::size_t mode_count)
        : size_(static_cast<std::uint8_t>(mode_count))
    {
        if (mode_count > kMaxModes) {
            throw std::invalid_argument("Monomial: mode count " + std::to_string(mode_count) +
                                        " exceeds capacity " + std::to_string(kMaxModes));
        }
    }

    static Monomial from_exponents(std::span<const int> exponents)
    {
        Monomial m(exponents.size());
        for (std::size_t k = 0; k < exponents.size(); ++k) {
            m.set(k, exponents[k]);
        }
        return m;
    }

    static Monomial from_exponents(std::initializer_list<int> exponents)
    {
        return from_exponents(std::span<const int>(exponents.begin(), exponents.size()));
    }

    std::size_t mode_count() const { return size_; }

    int operator[](std::size_t mode) const { return exps_[mode]; }

    void set(std::size_t mode, int exponent)
    {
        if (mode >= size_) {
            throw std::out_of_range("Monomial: mode index out of range");
        }
        if (exponent < 0 || exponent > 255) {
            throw std::invalid_argument("Monomial: exponent must lie in [0, 255], got " +
                                        std::to_string(exponent));
        }
        exps_[mode] = static_cast<std::uint8_t>(exponent);
    }

    void increment(std::size_t mode) { ++exps_[mode]; }

    int total_degree() const
    {
        int d = 0;
        for (std::size_t k = 0; k < size_; ++k) {
            d += exps_[k];
        }
        return d;
    }

    /// prod_k n_k!, the squared norm of the Fock state this monomial creates.
    double factorial_weight() const
    {
        double w = 1.0;
        for (std::size_t k = 0; k < size_; ++k) {
            w *= detail::kFactorials[exps_[k]];
        }
        return w;
    }

    std::vector<int> exponents() const { return {exps_.begin(), exps_.begin() + size_}; }

    auto operator<=>(const Monomial&) const = default;

private:
    std::uint8_t size_ = 0;
    std::array<std::uint8_t, kMaxModes> exps_{};
};

struct Term
{
    Monomial monomial;
    Complex amplitude;
};

/// Sorts by monomial, merges duplicates and prunes negligible amplitudes.
inline void canonicalize(std::vector<Term>& terms)
{
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.monomial < b.monomial; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < terms.size();) {
        Term merged = terms[i];
        std::size_t j = i + 1;
        for (; j < terms.size() && terms[j].monomial == merged.monomial; ++j) {
            merged.amplitude += terms[j].amplitude;
        }
        if (std::abs(merged.amplitude) >= kPruneTolerance) {
            terms[out++] = merged;
        }
        i = j;
    }
    terms.resize(out);
}

/**
 * Sparse complex combination of creation-operator monomials over a fixed
 * number of modes. Immutable once built; terms are kept sorted by monomial.
 */
class CreationPolynomial
{
public:
    explicit CreationPolynomial(std::size_t mode_count = 0)
        : mode_count_(mode_count)
    {
        if (mode_count > kMaxModes) {
            throw std::invalid_argument("CreationPolynomial: too many modes");
        }
    }

    /// Builds from arbitrary terms; all monomials must have `mode_count` modes.
    CreationPolynomial(std::size_t mode_count, std::vector<Term> terms)
        : CreationPolynomial(mode_count)
    {
        for (const auto& t : terms) {
            if (t.monomial.mode_count() != mode_count) {
                throw std::invalid_argument("CreationPolynomial: monomial has " +
                                            std::to_string(t.monomial.mode_count()) +
                                            " modes, expected " + std::to_string(mode_count));
            }
        }
        canonicalize(terms);
        terms_ = std::move(terms);
    }

    static CreationPolynomial constant(std::size_t mode_count, Complex value)
    {
        return CreationPolynomial(mode_count, {{Monomial(mode_count), value}});
    }

    /// The single creation operator A_mode.
    static CreationPolynomial creation(std::size_t mode_count, std::size_t mode)
    {
        if (mode >= mode_count) {
            throw std::out_of_range("CreationPolynomial::creation: mode out of range");
        }
        Monomial m(mode_count);
        m.set(mode, 1);
        return CreationPolynomial(mode_count, {{m, Complex{1.0, 0.0}}});
    }

    std::size_t mode_count() const { return mode_count_; }
    std::span<const Term> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    Complex coefficient(const Monomial& m) const
    {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const Term& t, const Monomial& key) { return t.monomial < key; });
        return (it != terms_.end() && it->monomial == m) ? it->amplitude : Complex{};
    }

    /// True when every monomial has total degree `degree` (the zero polynomial qualifies).
    bool is_homogeneous(int degree) const
    {
        return std::all_of(terms_.begin(), terms_.end(),
                           [degree](const Term& t) { return t.monomial.total_degree() == degree; });
    }

    int max_total_degree() const
    {
        int d = 0;
        for (const auto& t : terms_) {
            d = std::max(d, t.monomial.total_degree());
        }
        return d;
    }

    friend CreationPolynomial operator+(const CreationPolynomial& p, const CreationPolynomial& q)
    {
        p.require_same_modes(q, "operator+");
        std::vector<Term> terms(p.terms_);
        terms.insert(terms.end(), q.terms_.begin(), q.terms_.end());
        return CreationPolynomial(p.mode_count_, std::move(terms));
    }

    friend CreationPolynomial operator-(const CreationPolynomial& p, const CreationPolynomial& q)
    {
        return p + (-1.0) * q;
    }

    friend CreationPolynomial operator*(Complex s, const CreationPolynomial& p)
    {
        std::vector<Term> terms(p.terms_);
        for (auto& t : terms) {
            t.amplitude *= s;
        }
        return CreationPolynomial(p.mode_count_, std::move(terms));
    }

    friend CreationPolynomial operator*(double s, const CreationPolynomial& p) { return Complex{s, 0.0} * p; }

    void require_same_modes(const CreationPolynomial& other, const char* where) const
    {
        if (mode_count_ != other.mode_count_) {
            throw std::invalid_argument(std::string(where) + ": mode count mismatch (" +
                                        std::to_string(mode_count_) + " vs " +
                                        std::to_string(other.mode_count_) + ")");
        }
    }

private:
    std::size_t mode_count_ = 0;
    std::vector<Term> terms_;
};

/// An exponent vector with its amplitude, the input format of poly_from_terms.
using RawTerm = std::pair<std::vector<int>, Complex>;

/**
 * Canonical polynomial from (exponent vector, amplitude) pairs. The mode count
 * is taken from the vectors, or from `mode_count` when the list is empty.
 */
inline CreationPolynomial poly_from_terms(const std::vector<RawTerm>& raw,
                                          std::optional<std::size_t> mode_count = std::nullopt)
{
    std::size_t modes = mode_count.value_or(raw.empty() ? 0 : raw.front().first.size());
    std::vector<Term> terms;
    terms.reserve(raw.size());
    for (const auto& [exponents, amplitude] : raw) {
        if (exponents.size() != modes) {
            throw std::invalid_argument("poly_from_terms: exponent vectors of mismatched length (" +
                                        std::to_string(exponents.size()) + " vs " +
                                        std::to_string(modes) + ")");
        }
        terms.push_back({Monomial::from_exponents(exponents), amplitude});
    }
    return CreationPolynomial(modes, std::move(terms));
}

/// Product of two polynomials; creation operators commute, so exponents add.
inline CreationPolynomial poly_multiply(const CreationPolynomial& p, const CreationPolynomial& q)
{
    p.require_same_modes(q, "poly_multiply");
    const std::size_t n = p.mode_count();
    std::vector<Term> terms;
    terms.reserve(p.size() * q.size());
    for (const auto& a : p.terms()) {
        for (const auto& b : q.terms()) {
            Monomial m(n);
            for (std::size_t k = 0; k < n; ++k) {
                m.set(k, a.monomial[k] + b.monomial[k]);
            }
            terms.push_back({m, a.amplitude * b.amplitude});
        }
    }
    return CreationPolynomial(n, std::move(terms));
}

/// <0| p^dagger q |0>: sum over shared monomials of conj(p) q prod_k n_k!.
inline Complex vacuum_inner_product(const CreationPolynomial& p, const CreationPolynomial& q)
{
    p.require_same_modes(q, "vacuum_inner_product");
    Complex sum{};
    auto a = p.terms().begin();
    auto b = q.terms().begin();
    while (a != p.terms().end() && b != q.terms().end()) {
        if (a->monomial < b->monomial) {
            ++a;
        } else if (b->monomial < a->monomial) {
            ++b;
        } else {
            sum += std::conj(a->amplitude) * b->amplitude * a->monomial.factorial_weight();
            ++a;
            ++b;
        }
    }
    return sum;
}

inline double vacuum_norm_squared(const CreationPolynomial& p)
{
    return vacuum_inner_product(p, p).real();
}

inline CreationPolynomial normalized(const CreationPolynomial& p)
{
    const double norm2 = vacuum_norm_squared(p);
    if (!(norm2 > 0.0)) {
        throw std::domain_error("normalized: zero polynomial cannot be normalized");
    }
    return (1.0 / std::sqrt(norm2)) * p;
}

/// Largest exponent of `mode` over all terms; 0 for the zero polynomial.
inline int degree_in_mode(const CreationPolynomial& p, std::size_t mode)
{
    if (mode >= p.mode_count()) {
        throw std::out_of_range("degree_in_mode: mode out of range");
    }
    int d = 0;
    for (const auto& t : p.terms()) {
        d = std::max(d, t.monomial[mode]);
    }
    return d;
}

/**
 * The coefficient Q^(n) of (A_mode)^n in p = sum_n (A_mode)^n Q^(n). The
 * result keeps the same mode count with `mode`'s exponent set to zero.
 */
inline CreationPolynomial coefficient_of_power(const CreationPolynomial& p, std::size_t mode, int n)
{
    if (mode >= p.mode_count()) {
        throw std::out_of_range("coefficient_of_power: mode out of range");
    }
    if (n < 0) {
        throw std::invalid_argument("coefficient_of_power: negative power");
    }
    std::vector<Term> terms;
    for (const auto& t : p.terms()) {
        if (t.monomial[mode] == n) {
            Term stripped = t;
            stripped.monomial.set(mode, 0);
            terms.push_back(stripped);
        }
    }
    return CreationPolynomial(p.mode_count(), std::move(terms));
}

/// (A_mode)^n * p.
inline CreationPolynomial multiply_by_power(const CreationPolynomial& p, std::size_t mode, int n)
{
    if (mode >= p.mode_count()) {
        throw std::out_of_range("multiply_by_power: mode out of range");
    }
    std::vector<Term> terms(p.terms().begin(), p.terms().end());
    for (auto& t : terms) {
        t.monomial.set(mode, t.monomial[mode] + n);
    }
    return CreationPolynomial(p.mode_count(), std::move(terms));
}

/// Drops `mode` and compacts indices; the mode must be unoccupied in every term.
inline CreationPolynomial remove_mode(const CreationPolynomial& p, std::size_t mode)
{
    if (mode >= p.mode_count()) {
        throw std::out_of_range("remove_mode: mode out of range");
    }
    const std::size_t n = p.mode_count() - 1;
    std::vector<Term> terms;
    terms.reserve(p.size());
    for (const auto& t : p.terms()) {
        if (t.monomial[mode] != 0) {
            throw std::invalid_argument("remove_mode: mode is still occupied");
        }
        Monomial m(n);
        for (std::size_t k = 0, j = 0; k < p.mode_count(); ++k) {
            if (k != mode) {
                m.set(j++, t.monomial[k]);
            }
        }
        terms.push_back({m, t.amplitude});
    }
    return CreationPolynomial(n, std::move(terms));
}

/// Re-expresses p over `mode_count` modes, placing its mode k at index offset + k.
inline CreationPolynomial embed_modes(const CreationPolynomial& p, std::size_t mode_count, std::size_t offset = 0)
{
    if (offset + p.mode_count() > mode_count) {
        throw std::invalid_argument("embed_modes: target too small");
    }
    std::vector<Term> terms;
    terms.reserve(p.size());
    for (const auto& t : p.terms()) {
        Monomial m(mode_count);
        for (std::size_t k = 0; k < p.mode_count(); ++k) {
            m.set(offset + k, t.monomial[k]);
        }
        terms.push_back({m, t.amplitude});
    }
    return CreationPolynomial(mode_count, std::move(terms));
}

/// Max amplitude difference between two polynomials over the same modes.
inline double max_abs_difference(const CreationPolynomial& p, const CreationPolynomial& q)
{
    const CreationPolynomial diff = p - q;
    double m = 0.0;
    for (const auto& t : diff.terms()) {
        m = std::max(m, std::abs(t.amplitude));
    }
    return m;
}

/**
 * Square unitary matrix over modes. Construction verifies U^dagger U = I to
 * kUnitarityTolerance.
 */
class ModeUnitary
{
public:
    explicit ModeUnitary(Eigen::MatrixXcd matrix, double tolerance = kUnitarityTolerance)
        : matrix_(std::move(matrix))
    {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
            throw std::invalid_argument("ModeUnitary: matrix must be square and non-empty");
        }
        const double dev = deviation(matrix_);
        if (!(dev <= tolerance)) {
            throw std::invalid_argument("ModeUnitary: matrix is not unitary (max|U^dag U - I| = " +
                                        std::to_string(dev) + ")");
        }
    }

    static ModeUnitary identity(std::size_t dimension)
    {
        return ModeUnitary(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dimension),
                                                      static_cast<Eigen::Index>(dimension)));
    }

    static double deviation(const Eigen::MatrixXcd& m)
    {
        const auto n = m.rows();
        return (m.adjoint() * m - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    }

    std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    Complex operator()(std::size_t row, std::size_t col) const
    {
        return matrix_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    double unitarity_deviation() const { return deviation(matrix_); }

    ModeUnitary adjoint() const { return ModeUnitary(matrix_.adjoint()); }
    ModeUnitary transpose() const { return ModeUnitary(matrix_.transpose()); }

    /// Block-diagonal extension with the identity on modes [dimension(), dim).
    ModeUnitary embedded(std::size_t dim) const
    {
        if (dim < dimension()) {
            throw std::invalid_argument("ModeUnitary::embedded: target dimension too small");
        }
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim),
                                                        static_cast<Eigen::Index>(dim));
        m.topLeftCorner(matrix_.rows(), matrix_.cols()) = matrix_;
        return ModeUnitary(std::move(m));
    }

    /// Composition; applying U then V to a polynomial equals applying U * V.
    friend ModeUnitary operator*(const ModeUnitary& a, const ModeUnitary& b)
    {
        if (a.dimension() != b.dimension()) {
            throw std::invalid_argument("ModeUnitary product: dimension mismatch");
        }
        return ModeUnitary(a.matrix_ * b.matrix_);
    }

private:
    Eigen::MatrixXcd matrix_;
};

/**
 * Rewrites p in output-mode operators: each A_k is substituted by
 * sum_j U(k, j) Ã_j. Vacuum inner products are preserved.
 */
inline CreationPolynomial apply_unitary(const CreationPolynomial& p, const ModeUnitary& u)
{
    const std::size_t n = p.mode_count();
    if (u.dimension() != n) {
        throw std::invalid_argument("apply_unitary: unitary dimension " + std::to_string(u.dimension()) +
                                    " does not match polynomial mode count " + std::to_string(n));
    }
    std::vector<std::vector<std::pair<std::size_t, Complex>>> rows(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (u(k, j) != Complex{}) {
                rows[k].emplace_back(j, u(k, j));
            }
        }
    }

    std::vector<Term> out;
    std::vector<Term> partial;
    std::vector<Term> next;
    for (const auto& term : p.terms()) {
        partial.assign(1, Term{Monomial(n), term.amplitude});
        for (std::size_t k = 0; k < n; ++k) {
            for (int rep = 0; rep < term.monomial[k]; ++rep) {
                next.clear();
                next.reserve(partial.size() * rows[k].size());
                for (const auto& t : partial) {
                    for (const auto& [j, c] : rows[k]) {
                        Term grown{t.monomial, t.amplitude * c};
                        grown.monomial.increment(j);
                        next.push_back(grown);
                    }
                }
                canonicalize(next);
                partial.swap(next);
            }
        }
        out.insert(out.end(), partial.begin(), partial.end());
    }
    return CreationPolynomial(n, std::move(out));
}

}  // namespace domino
