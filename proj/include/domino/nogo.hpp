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
 * @file nogo.hpp
 * @brief Numerical checks that no linear-optical cascade discriminates the
 * nine domino states perfectly.
 *
 * Notation, for an apparatus unitary U (substitution convention A = U Ã)
 * and detected output mode d:
 *
 *  - n_s is the largest power of d^dag in any transformed state (0, 1 or 2);
 *  - Q_i^(n) is the coefficient of (d^dag)^n in the transformed psi_i;
 *  - M~^(i) = U^T M^(i) U, so M~_dd^(i) = c0^T M^(i) c0 where c0 is column d
 *    of U restricted to the six system rows, and the N = 1 conditional state
 *    of psi_i is 2 sum_{k != d} M~_dk^(i) e_k^dag |0>.
 *
 * Perfect discrimination needs, for every pair i != j, <Q_i^(n_s)|Q_j^(n_s)>
 * = 0 and (for n_s != 0) <Q_i^(n_s-1)|Q_j^(n_s-1)> = 0; these do not depend
 * on auxiliary photons. For n_s = 2 at most one label i0 may have
 * M~_dd^(i0) != 0, and by the T / S symmetry only i0 = 0 and i0 = 1 need to
 * be excluded.
 */
#pragma once

#include "domino/domino.hpp"
#include "domino/fock.hpp"
#include "domino/measure.hpp"
#include "domino/minimize.hpp"
#include "domino/optics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace domino {

namespace detail {

inline void require_system_fits(const ModeUnitary& u, std::size_t d)
{
    if (u.dimension() < kSystemModes) {
        throw std::invalid_argument("apparatus unitary must span at least the six system modes");
    }
    if (d >= u.dimension()) {
        throw std::out_of_range("detected mode out of range");
    }
}

/// Independent seeded stream for (seed, a, b).
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// n_s and the orthogonality conditions without auxiliary photons

struct NsAnalysis
{
    int n_s = 0;
    std::array<int, kStateCount> per_state_degrees{};
};

/// Transformed states psi_i -> U over the unitary's modes.
inline std::array<CreationPolynomial, kStateCount> transformed_states(const ModeUnitary& u, const DominoSet& set)
{
    std::array<CreationPolynomial, kStateCount> out;
    for (StateLabel label : StateLabel::all()) {
        out[label.slot()] = apply_unitary(set.padded_state(label, u.dimension()), u);
    }
    return out;
}

inline NsAnalysis compute_ns(const ModeUnitary& u, std::size_t d, const DominoSet& set)
{
    detail::require_system_fits(u, d);
    NsAnalysis result;
    const auto states = transformed_states(u, set);
    for (std::size_t s = 0; s < kStateCount; ++s) {
        result.per_state_degrees[s] = degree_in_mode(states[s], d);
        result.n_s = std::max(result.n_s, result.per_state_degrees[s]);
    }
    return result;
}

struct PairResidual
{
    StateLabel first;
    StateLabel second;
    double top = 0.0;                     ///< |<Q_i^(n_s)|Q_j^(n_s)>|
    std::optional<double> top_minus_one;  ///< |<Q_i^(n_s-1)|Q_j^(n_s-1)>|
};

struct ConditionResiduals
{
    int n_s = 0;
    bool degenerate = false;          ///< n_s = 0: detected mode decoupled, residuals undefined
    std::vector<PairResidual> pairs;  ///< the 36 pairs i < j

    const PairResidual& pair(StateLabel a, StateLabel b) const
    {
        if (a == b) {
            throw std::invalid_argument("ConditionResiduals::pair: labels must differ");
        }
        const StateLabel lo = std::min(a, b);
        const StateLabel hi = std::max(a, b);
        for (const auto& p : pairs) {
            if (p.first == lo && p.second == hi) {
                return p;
            }
        }
        throw std::out_of_range("ConditionResiduals::pair: pair not present (degenerate analysis?)");
    }

    double max_residual() const
    {
        double m = 0.0;
        for (const auto& p : pairs) {
            m = std::max({m, p.top, p.top_minus_one.value_or(0.0)});
        }
        return m;
    }
};

inline ConditionResiduals condition_residuals(const ModeUnitary& u, std::size_t d, const DominoSet& set)
{
    detail::require_system_fits(u, d);
    const auto states = transformed_states(u, set);
    ConditionResiduals result;
    for (const auto& s : states) {
        result.n_s = std::max(result.n_s, degree_in_mode(s, d));
    }
    if (result.n_s == 0) {
        result.degenerate = true;
        return result;
    }
    std::array<CreationPolynomial, kStateCount> top;
    std::array<CreationPolynomial, kStateCount> below;
    for (std::size_t s = 0; s < kStateCount; ++s) {
        top[s] = coefficient_of_power(states[s], d, result.n_s);
        below[s] = coefficient_of_power(states[s], d, result.n_s - 1);
    }
    for (std::size_t i = 0; i < kStateCount; ++i) {
        for (std::size_t j = i + 1; j < kStateCount; ++j) {
            result.pairs.push_back({StateLabel::from_slot(i), StateLabel::from_slot(j),
                                    std::abs(vacuum_inner_product(top[i], top[j])),
                                    std::abs(vacuum_inner_product(below[i], below[j]))});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Quadratic-form (M-matrix) route

/// M~ = U^T M U with M zero-padded to the unitary's dimension.
inline Eigen::MatrixXcd transformed_matrix(const ModeUnitary& u, const DominoSet& set, StateLabel label)
{
    const Eigen::MatrixXcd m = set.padded_matrix(label, u.dimension());
    return u.matrix().transpose() * m * u.matrix();
}

using SystemVector = Eigen::Matrix<Complex, 6, 1>;

/// Column d of U restricted to the six system rows.
inline SystemVector detected_column(const ModeUnitary& u, std::size_t d)
{
    detail::require_system_fits(u, d);
    return u.matrix().col(static_cast<Eigen::Index>(d)).head<6>();
}

/// c0^T M^(i) c0.
inline Complex m_dd(const SystemVector& c0, const DominoSet& set, StateLabel label)
{
    return c0.transpose() * set.matrix(label).cast<Complex>() * c0;
}

/// (M~_dk)_{k != d}: the N = 1 conditional amplitudes (up to the factor 2).
inline Eigen::VectorXcd m_vector(const ModeUnitary& u, std::size_t d, const DominoSet& set, StateLabel label)
{
    const Eigen::MatrixXcd mt = transformed_matrix(u, set, label);
    Eigen::VectorXcd v(mt.cols() - 1);
    for (Eigen::Index k = 0, j = 0; k < mt.cols(); ++k) {
        if (k != static_cast<Eigen::Index>(d)) {
            v(j++) = mt(static_cast<Eigen::Index>(d), k);
        }
    }
    return v;
}

/**
 * Residuals of the n_s = 2 conditions for a given i0: |M~_dd^(i)| for every
 * i != i0, and |<M0^(i)|M0^(j)>| for the 36 pairs i < j.
 */
struct I0Residuals
{
    std::vector<double> diagonal;
    std::vector<double> overlaps;

    std::vector<double> sorted_all() const
    {
        std::vector<double> all(diagonal);
        all.insert(all.end(), overlaps.begin(), overlaps.end());
        std::sort(all.begin(), all.end());
        return all;
    }
};

inline I0Residuals i0_residuals(const ModeUnitary& u, std::size_t d, const DominoSet& set, StateLabel i0)
{
    const SystemVector c0 = detected_column(u, d);
    std::array<Eigen::VectorXcd, kStateCount> vecs;
    I0Residuals r;
    for (StateLabel label : StateLabel::all()) {
        vecs[label.slot()] = m_vector(u, d, set, label);
        if (label != i0) {
            r.diagonal.push_back(std::abs(m_dd(c0, set, label)));
        }
    }
    for (std::size_t i = 0; i < kStateCount; ++i) {
        for (std::size_t j = i + 1; j < kStateCount; ++j) {
            r.overlaps.push_back(std::abs(vecs[i].dot(vecs[j])));
        }
    }
    return r;
}

/// Agreement between the M-matrix route and direct substitution over random unitaries.
struct MMatrixConsistency
{
    int trials = 0;
    double quadratic_form = 0.0;      ///< |U^T M U as polynomial - apply_unitary(psi, U)|
    double diagonal = 0.0;            ///< |c0^T M c0 - coefficient of (d)^2|
    double conditional_vector = 0.0;  ///< |N = 1 conditional amplitudes - 2 M~_dk|

    double max_deviation() const { return std::max({quadratic_form, diagonal, conditional_vector}); }
};

/// Random unitaries of dimension 6..8 with detected mode trial % dimension.
inline MMatrixConsistency check_m_matrix_consistency(int trials, std::uint64_t seed, const DominoSet& set)
{
    MMatrixConsistency out;
    out.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        auto rng = detail::stream(seed, 0x3A7, static_cast<std::uint64_t>(trial));
        const std::size_t dim = kSystemModes + static_cast<std::size_t>(trial % 3);
        const auto u = random_unitary(dim, rng());
        const std::size_t d = static_cast<std::size_t>(trial) % dim;
        const SystemVector c0 = detected_column(u, d);
        for (auto label : StateLabel::all()) {
            const auto padded = set.padded_state(label, dim);
            const auto direct = apply_unitary(padded, u);
            out.quadratic_form = std::max(
                out.quadratic_form, max_abs_difference(quadratic_form_polynomial(transformed_matrix(u, set, label)), direct));
            const auto top = coefficient_of_power(direct, d, 2);
            const Complex m00 = top.is_zero() ? Complex{} : top.terms()[0].amplitude;
            out.diagonal = std::max(out.diagonal, std::abs(m_dd(c0, set, label) - m00));
            const auto cond = conditional_state(padded, u, d, 1).state;
            const Eigen::VectorXcd m = m_vector(u, d, set, label);
            for (Eigen::Index k = 0; k < m.size(); ++k) {
                std::vector<int> e(dim - 1, 0);
                e[static_cast<std::size_t>(k)] = 1;
                out.conditional_vector = std::max(
                    out.conditional_vector, std::abs(cond.coefficient(Monomial::from_exponents(e)) - 2.0 * m(k)));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// c0 constraint system (i0 in {0, 1})

/**
 * Constraint values as functions of c0 alone. Unitarity of the rows of U
 * gives r_l^dag r_m = delta_lm - conj(u_l) u_m for any number of auxiliary
 * columns, so <M0^(i)|M0^(j)> = x_i^dag x_j - conj(m_i) m_j with
 * x_i = M^(i) c0 and m_i = c0^T x_i.
 */
struct C0Terms
{
    std::array<Complex, kStateCount> diagonal{};                            ///< m_i
    std::array<std::array<Complex, kStateCount>, kStateCount> overlaps{};  ///< <M0^(i)|M0^(j)>
};

inline C0Terms c0_terms(const SystemVector& c0, const DominoSet& set)
{
    C0Terms t;
    std::array<SystemVector, kStateCount> x;
    for (StateLabel label : StateLabel::all()) {
        x[label.slot()] = set.matrix(label).cast<Complex>() * c0;
        t.diagonal[label.slot()] = c0.transpose() * x[label.slot()];
    }
    for (std::size_t i = 0; i < kStateCount; ++i) {
        for (std::size_t j = 0; j < kStateCount; ++j) {
            t.overlaps[i][j] = x[i].dot(x[j]) - std::conj(t.diagonal[i]) * t.diagonal[j];
        }
    }
    return t;
}

/// sum_{i != i0} |m_i|^2 + sum_{i<j} |<M0^(i)|M0^(j)>|^2, for c0 as given (not renormalized).
inline double c0_objective(const SystemVector& c0, const DominoSet& set, StateLabel i0)
{
    const C0Terms t = c0_terms(c0, set);
    double f = 0.0;
    for (std::size_t i = 0; i < kStateCount; ++i) {
        if (i != i0.slot()) {
            f += std::norm(t.diagonal[i]);
        }
        for (std::size_t j = i + 1; j < kStateCount; ++j) {
            f += std::norm(t.overlaps[i][j]);
        }
    }
    return f;
}

/// A unitary of size `dimension` whose column 0 is (c0, 0, ..., 0); c0 must be a unit vector.
inline ModeUnitary complete_to_unitary(const SystemVector& c0, std::size_t dimension = kSystemModes)
{
    if (std::abs(c0.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("complete_to_unitary: c0 must have unit norm");
    }
    const auto n = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd seed = Eigen::MatrixXcd::Identity(n, n);
    seed.col(0).setZero();
    seed.col(0).head<6>() = c0;
    // keep the seed full rank: replace the identity column most aligned with c0
    Eigen::Index idx = 0;
    c0.cwiseAbs().maxCoeff(&idx);
    if (idx != 0) {
        seed.col(idx) = Eigen::VectorXcd::Unit(n, 0);
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(seed);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
    const Complex overlap = q.col(0).dot(seed.col(0));
    q.col(0) *= overlap / std::abs(overlap);
    return ModeUnitary(std::move(q));
}

struct C0Certificate
{
    StateLabel i0;
    SystemVector best_c0 = SystemVector::Zero();
    double residual_at_unit_norm = std::numeric_limits<double>::infinity();
    int restarts = 0;
    std::uint64_t seed = 0;
    double floor_threshold = 1e-4;
    std::size_t evaluations = 0;
    std::vector<double> restart_minima;

    bool passed() const { return residual_at_unit_norm > floor_threshold; }
};

struct CertifyOptions
{
    double floor_threshold = 1e-4;
    std::size_t max_evaluations_per_restart = 20000;
};

inline SystemVector c0_from_parameters(std::span<const double> v)
{
    SystemVector c;
    for (Eigen::Index k = 0; k < 6; ++k) {
        c(k) = Complex(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>(k) + 6]);
    }
    const double n = c.norm();
    return n > 0.0 ? SystemVector(c / n) : c;
}

/**
 * Multi-restart minimization of c0_objective over unit c0 in C^6: seeded
 * Gaussian starts, Nelder-Mead, then quasi-Newton polish repeated while it
 * still improves. The certificate passes when the best value stays above
 * the floor, i.e. no nontrivial c0 satisfies the constraints.
 */
inline C0Certificate certify_c0_infeasibility(StateLabel i0, int restarts, std::uint64_t seed,
                                              const DominoSet& set, const CertifyOptions& options = {})
{
    if (i0 != StateLabel(0) && i0 != StateLabel(1)) {
        throw std::invalid_argument("certify_c0_infeasibility: i0 must be 0 or 1 (other labels reduce by symmetry)");
    }
    if (restarts <= 0) {
        throw std::invalid_argument("certify_c0_infeasibility: restarts must be positive");
    }
    C0Certificate cert;
    cert.i0 = i0;
    cert.restarts = restarts;
    cert.seed = seed;
    cert.floor_threshold = options.floor_threshold;

    const Objective objective = [&](std::span<const double> v) {
        const SystemVector c = c0_from_parameters(v);
        return c.norm() > 0.0 ? c0_objective(c, set, i0) : std::numeric_limits<double>::max();
    };
    MinimizeOptions nm;
    nm.max_evaluations = options.max_evaluations_per_restart;
    nm.initial_step = 0.3;
    nm.size_tolerance = 1e-9;
    MinimizeOptions polish;
    polish.max_evaluations = options.max_evaluations_per_restart;

    for (int r = 0; r < restarts; ++r) {
        auto rng = detail::stream(seed, static_cast<std::uint64_t>(i0.slot()), static_cast<std::uint64_t>(r));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> x(12);
        for (auto& v : x) {
            v = gauss(rng);
        }
        MinimizeResult best = nelder_mead(objective, x, nm);
        cert.evaluations += best.evaluations;
        for (int round = 0; round < 5; ++round) {
            MinimizeResult next = bfgs_polish(objective, best.x, polish);
            cert.evaluations += next.evaluations;
            if (!(next.value < best.value - 1e-15)) {
                break;
            }
            best = next;
        }
        cert.restart_minima.push_back(best.value);
        if (best.value < cert.residual_at_unit_norm) {
            cert.residual_at_unit_norm = best.value;
            cert.best_c0 = c0_from_parameters(best.x);
        }
    }
    return cert;
}

/**
 * The forced forms c0 = (0, u1, 0, 0, u4, 0) for i0 = 0 and
 * c0 = (u0, 0, 0, u, u, 0) for i0 = 1, evaluated at fixed generic amplitudes.
 * Every M~_dd other than i0's vanishes, while the +-k pair overlaps survive at
 * |u|^2 / 8, so neither form satisfies the orthogonality conditions.
 */
struct ForcedFormReport
{
    SystemVector zero;        ///< i0 = 0 form
    SystemVector one;         ///< i0 = 1 form
    C0Terms zero_terms;
    C0Terms one_terms;
    double max_deviation = 0.0;    ///< vanishing diagonals and |u|^2/8 pair values
    double min_surviving = 0.0;    ///< smallest of the surviving pair overlaps

    double pair(bool i0_one, int k) const
    {
        const C0Terms& t = i0_one ? one_terms : zero_terms;
        return std::abs(t.overlaps[StateLabel(k).slot()][StateLabel(-k).slot()]);
    }
};

inline ForcedFormReport check_forced_forms(const DominoSet& set)
{
    ForcedFormReport r;
    r.zero << 0.0, Complex(0.6, 0.2), 0.0, 0.0, Complex(0.3, -0.5), 0.0;
    r.zero.normalize();
    r.one << Complex(0.7, 0.1), 0.0, 0.0, Complex(0.2, 0.4), Complex(0.2, 0.4), 0.0;
    r.one.normalize();
    r.zero_terms = c0_terms(r.zero, set);
    r.one_terms = c0_terms(r.one, set);
    for (auto label : StateLabel::all()) {
        if (label != StateLabel(0)) {
            r.max_deviation = std::max(r.max_deviation, std::abs(r.zero_terms.diagonal[label.slot()]));
        }
        if (label != StateLabel(1)) {
            r.max_deviation = std::max(r.max_deviation, std::abs(r.one_terms.diagonal[label.slot()]));
        }
    }
    const double expected[4] = {std::norm(r.zero(4)) / 8.0, std::norm(r.zero(1)) / 8.0, std::norm(r.one(0)) / 8.0,
                                std::norm(r.one(3)) / 8.0};
    const double actual[4] = {r.pair(false, 1), r.pair(false, 2), r.pair(true, 4), r.pair(true, 3)};
    r.min_surviving = actual[0];
    for (int k = 0; k < 4; ++k) {
        r.max_deviation = std::max(r.max_deviation, std::abs(actual[k] - expected[k]));
        r.min_surviving = std::min(r.min_surviving, actual[k]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Symmetry reduction of i0 != 0 to i0 = 1

struct ReductionRecord
{
    StateLabel i0;
    SymmetryOp symmetry;      ///< R_i0, maps psi_1 to psi_i0
    ModeUnitary reduced;      ///< apparatus for i0 = 1
    std::vector<double> candidate_residuals;  ///< sorted i0-condition residuals of U'
    std::vector<double> reduced_residuals;    ///< sorted 1-condition residuals of the reduced U
    double max_deviation = 0.0;
};

/**
 * Given a candidate U' for label i0, the apparatus U = R_i0 * U' (apply the
 * symmetry first, then U') makes psi_1 behave exactly as psi_i0 did under
 * U', so the i0 conditions for U' become the i0 = 1 conditions for U.
 */
inline ReductionRecord reduce_by_symmetry(StateLabel i0, const ModeUnitary& candidate, std::size_t d,
                                          const DominoSet& set)
{
    if (i0 == StateLabel(0)) {
        throw std::invalid_argument("reduce_by_symmetry: psi_0 is a fixed point of the symmetry group");
    }
    SymmetryOp r = symmetry_R(i0.index());
    ModeUnitary reduced = r.substitution(candidate.dimension()) * candidate;
    ReductionRecord rec{i0, r, reduced, i0_residuals(candidate, d, set, i0).sorted_all(),
                        i0_residuals(reduced, d, set, StateLabel(1)).sorted_all(), 0.0};
    for (std::size_t k = 0; k < rec.candidate_residuals.size(); ++k) {
        rec.max_deviation = std::max(rec.max_deviation,
                                     std::abs(rec.candidate_residuals[k] - rec.reduced_residuals[k]));
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Auxiliary-photon factorization

struct AuxFactorizationReport
{
    int n_s = 0;
    int n_a = 0;
    double aux_top_norm = 0.0;      ///< <Qa^(n_a)|Qa^(n_a)>
    double aux_second_norm = 0.0;   ///< <Qa^(n_a-1)|Qa^(n_a-1)>
    double closed_form_top = 0.0;   ///< A_{n_s}
    double closed_form_below = 0.0; ///< A_{n_s - 1}
    Complex fitted_top;             ///< least-squares A_{n_s}
    Complex fitted_below;           ///< least-squares A_{n_s - 1}
    double max_deviation_top = 0.0;        ///< N_max factorization
    double max_deviation_second = 0.0;     ///< N_max - 1 two-term form, closed-form coefficients
    double max_deviation_fit = 0.0;        ///< N_max - 1 two-term form, fitted coefficients
    double max_deviation_cross_terms = 0.0;///< C_{m,n} identities
    bool second_checked = false;           ///< false when n_s = 0

    double max_deviation() const
    {
        return std::max({max_deviation_top, max_deviation_second, max_deviation_fit, max_deviation_cross_terms});
    }
};

/**
 * Checks, for all 81 ordered pairs (i, j), that the conditional inner
 * products with auxiliary photons reduce to those without:
 *
 *   <psi_i^Nmax|psi_j^Nmax>     = <Qa^(na)|Qa^(na)> <Qi^(ns)|Qj^(ns)>
 *   <psi_i^Nmax-1|psi_j^Nmax-1> = A_ns <Qi^(ns)|Qj^(ns)> + A_ns-1 <Qi^(ns-1)|Qj^(ns-1)>
 *
 * with A_ns = <Qa^(na-1)|Qa^(na-1)> - 2 na ns <Qa^(na)|Qa^(na)> and
 * A_ns-1 = <Qa^(na)|Qa^(na)>, and the term-by-term identities for
 * C_{m,n}(i, j) behind them. Conditional states here are the bare
 * coefficients of (d^dag)^N, without sqrt(N!).
 */
inline AuxFactorizationReport verify_aux_factorization(const AuxiliaryPreparation& aux, const ModeUnitary& u,
                                                       std::size_t d, const DominoSet& set)
{
    const std::size_t modes = kSystemModes + aux.aux_mode_count();
    if (u.dimension() != modes) {
        throw std::invalid_argument("verify_aux_factorization: unitary must span 6 + aux modes");
    }
    detail::require_system_fits(u, d);
    AuxFactorizationReport rep;

    const CreationPolynomial aux_out = apply_unitary(aux.embedded(), u);
    const auto sys_out = transformed_states(u, set);
    rep.n_a = degree_in_mode(aux_out, d);
    for (const auto& s : sys_out) {
        rep.n_s = std::max(rep.n_s, degree_in_mode(s, d));
    }
    const int n_max = rep.n_a + rep.n_s;

    auto qa = [&](int n) {
        return n < 0 ? CreationPolynomial(modes) : coefficient_of_power(aux_out, d, n);
    };
    auto qs = [&](std::size_t s, int n) {
        return n < 0 ? CreationPolynomial(modes) : coefficient_of_power(sys_out[s], d, n);
    };
    rep.aux_top_norm = vacuum_norm_squared(qa(rep.n_a));
    rep.aux_second_norm = vacuum_norm_squared(qa(rep.n_a - 1));
    rep.closed_form_top = rep.aux_second_norm - 2.0 * rep.n_a * rep.n_s * rep.aux_top_norm;
    rep.closed_form_below = rep.aux_top_norm;

    std::array<CreationPolynomial, kStateCount> cond_top;
    std::array<CreationPolynomial, kStateCount> cond_second;
    for (std::size_t s = 0; s < kStateCount; ++s) {
        const CreationPolynomial total = poly_multiply(aux_out, sys_out[s]);
        cond_top[s] = coefficient_of_power(total, d, n_max);
        cond_second[s] = coefficient_of_power(total, d, n_max - 1 < 0 ? 0 : n_max - 1);
    }

    rep.second_checked = rep.n_s > 0;
    Eigen::MatrixXcd design(kStateCount * kStateCount, 2);
    Eigen::VectorXcd rhs(kStateCount * kStateCount);
    for (std::size_t i = 0; i < kStateCount; ++i) {
        for (std::size_t j = 0; j < kStateCount; ++j) {
            const Complex top_ij = vacuum_inner_product(qs(i, rep.n_s), qs(j, rep.n_s));
            const Complex lhs_top = vacuum_inner_product(cond_top[i], cond_top[j]);
            rep.max_deviation_top = std::max(rep.max_deviation_top, std::abs(lhs_top - rep.aux_top_norm * top_ij));
            if (!rep.second_checked) {
                continue;
            }
            const Complex below_ij = vacuum_inner_product(qs(i, rep.n_s - 1), qs(j, rep.n_s - 1));
            const Complex lhs_second = vacuum_inner_product(cond_second[i], cond_second[j]);
            rep.max_deviation_second =
                std::max(rep.max_deviation_second,
                         std::abs(lhs_second - rep.closed_form_top * top_ij - rep.closed_form_below * below_ij));
            const auto row = static_cast<Eigen::Index>(i * kStateCount + j);
            design(row, 0) = top_ij;
            design(row, 1) = below_ij;
            rhs(row) = lhs_second;

            if (rep.n_a >= 1) {
                // C_{m,n}(i, j) = <Qa^(na-1+m) Qi^(ns-m) | Qa^(na-1+n) Qj^(ns-n)>
                auto c_term = [&](int m, int n) {
                    return vacuum_inner_product(poly_multiply(qa(rep.n_a - 1 + m), qs(i, rep.n_s - m)),
                                                poly_multiply(qa(rep.n_a - 1 + n), qs(j, rep.n_s - n)));
                };
                auto c_term_swapped = [&](int m, int n) {
                    return vacuum_inner_product(poly_multiply(qa(rep.n_a - 1 + m), qs(j, rep.n_s - m)),
                                                poly_multiply(qa(rep.n_a - 1 + n), qs(i, rep.n_s - n)));
                };
                const Complex c00 = c_term(0, 0);
                const Complex c10 = c_term(1, 0);
                const Complex c01 = c_term(0, 1);
                const Complex c11 = c_term(1, 1);
                const double na_ns = static_cast<double>(rep.n_a * rep.n_s);
                const double devs[] = {
                    std::abs(c00 - rep.aux_second_norm * top_ij),
                    std::abs(c11 - rep.aux_top_norm * below_ij),
                    std::abs(c10 + na_ns * rep.aux_top_norm * top_ij),
                    std::abs(c10 - c01),
                    std::abs(c10 - std::conj(c_term_swapped(0, 1))),
                    std::abs(c00 + c10 + c01 + c11 - lhs_second),
                };
                for (double dv : devs) {
                    rep.max_deviation_cross_terms = std::max(rep.max_deviation_cross_terms, dv);
                }
            }
        }
    }
    if (rep.second_checked) {
        const Eigen::VectorXcd coef = design.colPivHouseholderQr().solve(rhs);
        rep.fitted_top = coef(0);
        rep.fitted_below = coef(1);
        rep.max_deviation_fit = (design * coef - rhs).cwiseAbs().maxCoeff();
    }
    return rep;
}

struct AuxTrialConfig
{
    int trials = 200;
    std::uint64_t seed = 1;
    int max_aux_modes = 2;
    int max_aux_degree = 3;
    int max_aux_terms = 3;
};

struct AuxTrialSummary
{
    int trials = 0;
    double max_deviation = 0.0;
    double max_deviation_top = 0.0;
    double max_deviation_second = 0.0;
    double max_deviation_fit = 0.0;
    double max_deviation_cross_terms = 0.0;
    int second_skipped = 0;  ///< trials with n_s = 0
};

/// A random auxiliary polynomial with 1..max_terms monomials of degree 1..max_degree.
inline AuxiliaryPreparation random_aux_preparation(std::mt19937_64& rng, std::size_t aux_modes, int max_degree,
                                                   int max_terms)
{
    std::uniform_int_distribution<int> term_count(1, max_terms);
    std::uniform_int_distribution<int> degree(1, max_degree);
    std::uniform_int_distribution<std::size_t> which(0, aux_modes - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<RawTerm> raw;
    const int terms = term_count(rng);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> e(aux_modes, 0);
        const int deg = degree(rng);
        for (int p = 0; p < deg; ++p) {
            ++e[which(rng)];
        }
        const double re = gauss(rng);
        const double im = gauss(rng);
        raw.emplace_back(e, Complex(re, im));
    }
    const CreationPolynomial p = poly_from_terms(raw, aux_modes);
    return AuxiliaryPreparation(p.is_zero() ? CreationPolynomial::creation(aux_modes, 0) : p);
}

/// Random instances: 1..max_aux_modes auxiliary modes, Haar unitary, random detected mode.
inline AuxTrialSummary run_aux_factorization_trials(const AuxTrialConfig& config, const DominoSet& set)
{
    AuxTrialSummary sum;
    for (int t = 0; t < config.trials; ++t) {
        auto rng = detail::stream(config.seed, 0xA0A0, static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<int> mode_count(1, config.max_aux_modes);
        const auto aux_modes = static_cast<std::size_t>(mode_count(rng));
        const AuxiliaryPreparation aux =
            random_aux_preparation(rng, aux_modes, config.max_aux_degree, config.max_aux_terms);
        const std::size_t dim = kSystemModes + aux_modes;
        const ModeUnitary u = random_unitary(dim, rng());
        std::uniform_int_distribution<std::size_t> detected(0, dim - 1);
        const AuxFactorizationReport rep = verify_aux_factorization(aux, u, detected(rng), set);
        ++sum.trials;
        sum.max_deviation_top = std::max(sum.max_deviation_top, rep.max_deviation_top);
        sum.max_deviation_second = std::max(sum.max_deviation_second, rep.max_deviation_second);
        sum.max_deviation_fit = std::max(sum.max_deviation_fit, rep.max_deviation_fit);
        sum.max_deviation_cross_terms = std::max(sum.max_deviation_cross_terms, rep.max_deviation_cross_terms);
        sum.max_deviation = std::max(sum.max_deviation, rep.max_deviation());
        if (!rep.second_checked) {
            ++sum.second_skipped;
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Cascade optimizer

struct OptimizerConfig
{
    int aux_modes = 0;
    int aux_photons = 0;
    int depth = 1;
    int restarts = 20;
    std::uint64_t seed = 1;
    std::size_t max_evaluations_per_restart = 2000;
    std::size_t max_total_evaluations = 0;  ///< 0: unlimited

    void validate() const
    {
        if (aux_modes < 0 || aux_modes > 6) {
            throw std::invalid_argument("optimizer: aux_modes must lie in [0, 6]");
        }
        if (aux_photons < 0 || aux_photons + 2 > 6) {
            throw std::invalid_argument("optimizer: total photon number (2 + aux_photons) must not exceed 6");
        }
        if (aux_photons > 0 && aux_modes == 0) {
            throw std::invalid_argument("optimizer: auxiliary photons need auxiliary modes");
        }
        if (depth < 1 || depth > 3) {
            throw std::invalid_argument("optimizer: depth must lie in [1, 3]");
        }
        if (restarts < 1) {
            throw std::invalid_argument("optimizer: restarts must be positive");
        }
        if (max_evaluations_per_restart < 1) {
            throw std::invalid_argument("optimizer: max_evaluations_per_restart must be positive");
        }
    }
};

struct TraceRecord
{
    int level = 0;  ///< cascade depth searched
    int restart = 0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    double best_value = 0.0;  ///< success probability reached
};

struct OptimizationResult
{
    CascadeStrategy best;
    DiscriminationReport report;
    std::vector<TraceRecord> trace;
    bool budget_exhausted = false;
    std::size_t total_evaluations = 0;
};

/**
 * Search space for a cascade of `level` stages over `modes` modes: the root
 * mixes all modes; every non-final stage detects its mode 0 and branches on
 * every possible count (0..photons), each branch with its own mesh; the
 * final stage counts every remaining mode and guesses optimally.
 */
class CascadeSearchSpace
{
public:
    CascadeSearchSpace(std::size_t modes, int photons, int level)
        : modes_(modes)
        , photons_(photons)
        , level_(level)
    {
        layout(modes_, photons_, level_);
    }

    std::size_t parameter_count() const { return count_; }
    int level() const { return level_; }

    CascadeStrategy strategy(std::span<const double> params) const
    {
        if (params.size() != count_) {
            throw std::invalid_argument("CascadeSearchSpace: wrong parameter count");
        }
        std::size_t offset = 0;
        return CascadeStrategy(build(modes_, photons_, level_, params, offset), modes_);
    }

    /// Parameters of the same cascade one level shallower, extended with identity stages.
    std::vector<double> deepen(std::span<const double> shallow) const
    {
        if (level_ < 2) {
            throw std::logic_error("CascadeSearchSpace::deepen: nothing to extend");
        }
        std::vector<double> out;
        std::size_t offset = 0;
        extend(modes_, photons_, level_, shallow, offset, out);
        return out;
    }

private:
    static std::size_t mesh_size(std::size_t modes) { return modes * modes; }

    void layout(std::size_t modes, int photons, int level)
    {
        count_ += mesh_size(modes);
        if (level > 1) {
            for (int n = 0; n <= photons; ++n) {
                layout(modes - 1, photons - n, level - 1);
            }
        }
    }

    static CascadeNodePtr build(std::size_t modes, int photons, int level, std::span<const double> params,
                                std::size_t& offset)
    {
        const MeshParameterization mesh(modes);
        StageTransform transform(modes, mesh.elements(params.subspan(offset, mesh.parameter_count())));
        offset += mesh.parameter_count();
        if (level == 1) {
            return make_node(CountLeaf{std::move(transform), {}});
        }
        DetectStage stage{std::move(transform), 0, {}, nullptr};
        for (int n = 0; n <= photons; ++n) {
            stage.children[n] = build(modes - 1, photons - n, level - 1, params, offset);
        }
        return make_node(std::move(stage));
    }

    // A final count over `modes` equals "detect mode 0, then count the rest with the identity".
    static void extend(std::size_t modes, int photons, int level, std::span<const double> shallow,
                       std::size_t& offset, std::vector<double>& out)
    {
        const std::size_t m = mesh_size(modes);
        out.insert(out.end(), shallow.begin() + static_cast<std::ptrdiff_t>(offset),
                   shallow.begin() + static_cast<std::ptrdiff_t>(offset + m));
        offset += m;
        if (level == 2) {
            for (int n = 0; n <= photons; ++n) {
                out.insert(out.end(), mesh_size(modes - 1), 0.0);
            }
            return;
        }
        for (int n = 0; n <= photons; ++n) {
            extend(modes - 1, photons - n, level - 1, shallow, offset, out);
        }
    }

    std::size_t modes_;
    int photons_;
    int level_;
    std::size_t count_ = 0;
};

/**
 * Derivative-free search for the best cascade. Levels 1..depth are searched
 * in turn; restart 0 of level 1 starts at the identity (direct counting) and
 * restart 0 of each deeper level starts from the previous level's best, so
 * the result never gets worse with depth. Other restarts start from seeded
 * uniform angles. Deterministic per seed.
 */
inline OptimizationResult optimize_discrimination(const OptimizerConfig& config, const DominoSet& set)
{
    config.validate();
    const auto aux = AuxiliaryPreparation::fock(static_cast<std::size_t>(config.aux_modes), config.aux_photons);
    const std::size_t modes = kSystemModes + static_cast<std::size_t>(config.aux_modes);
    const int photons = 2 + config.aux_photons;
    EvaluationOptions eval;
    eval.with_confusion = false;

    std::vector<double> best_params;
    std::vector<TraceRecord> trace;
    std::size_t total = 0;
    bool exhausted = false;
    std::optional<CascadeSearchSpace> best_space;

    for (int level = 1; level <= config.depth && !exhausted; ++level) {
        const CascadeSearchSpace space(modes, photons, level);
        const Objective objective = [&](std::span<const double> x) {
            return -evaluate_strategy(space.strategy(x), set, aux, eval).success_probability;
        };
        std::vector<double> level_best_params;
        double level_best = -1.0;
        for (int r = 0; r < config.restarts; ++r) {
            if (config.max_total_evaluations > 0 && total >= config.max_total_evaluations) {
                exhausted = true;
                break;
            }
            std::vector<double> x0(space.parameter_count(), 0.0);
            auto rng = detail::stream(config.seed, static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(r));
            if (r == 0) {
                if (level > 1) {
                    x0 = space.deepen(best_params);
                }
            } else {
                std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
                for (auto& v : x0) {
                    v = angle(rng);
                }
            }
            MinimizeOptions opts;
            opts.max_evaluations = config.max_evaluations_per_restart;
            if (config.max_total_evaluations > 0) {
                opts.max_evaluations = std::min(opts.max_evaluations, config.max_total_evaluations - total);
            }
            opts.initial_step = 0.4;
            opts.size_tolerance = 1e-6;
            const MinimizeResult res = nelder_mead(objective, x0, opts);
            total += res.evaluations;
            const double value = -res.value;
            trace.push_back({level, r, config.seed, res.iterations, res.evaluations, value});
            if (value > level_best) {
                level_best = value;
                level_best_params = res.x;
            }
        }
        // restart 0 starts from the previous best, so a level that ran is never worse
        if (!level_best_params.empty()) {
            best_params = std::move(level_best_params);
            best_space.emplace(space);
        }
    }

    const CascadeStrategy strategy = freeze_guesses(best_space->strategy(best_params), set, aux);
    DiscriminationReport report = evaluate_strategy(strategy, set, aux);
    return {strategy, std::move(report), std::move(trace), exhausted, total};
}

}  // namespace domino
