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

// Thin RAII wrappers over GSL's multidimensional minimizers.

#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace domino {

using Objective = std::function<double(std::span<const double>)>;

struct MinimizeOptions
{
    std::size_t max_evaluations = 5000;
    double initial_step = 0.5;
    double size_tolerance = 1e-10;  ///< simplex size at which Nelder-Mead stops
    double gradient_tolerance = 1e-12;
};

struct MinimizeResult
{
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

struct GslVectorDeleter
{
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVector = std::unique_ptr<gsl_vector, GslVectorDeleter>;

inline GslVector to_gsl(std::span<const double> x)
{
    GslVector v(gsl_vector_alloc(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        gsl_vector_set(v.get(), i, x[i]);
    }
    return v;
}

inline std::vector<double> from_gsl(const gsl_vector* v)
{
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) {
        x[i] = gsl_vector_get(v, i);
    }
    return x;
}

/// Evaluation counter shared by the C callbacks; tracks the best point seen.
struct CountedObjective
{
    explicit CountedObjective(const Objective& objective)
        : f(&objective)
    {}

    const Objective* f;
    std::size_t evaluations = 0;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;

    double operator()(std::span<const double> x)
    {
        ++evaluations;
        double v = (*f)(x);
        if (!std::isfinite(v)) {
            v = std::numeric_limits<double>::max();
        }
        if (v < best_value) {
            best_value = v;
            best_x.assign(x.begin(), x.end());
        }
        return v;
    }
};

inline double gsl_value(const gsl_vector* v, void* params)
{
    auto* obj = static_cast<CountedObjective*>(params);
    return (*obj)(std::span<const double>(v->data, v->size));
}

inline void gsl_gradient(const gsl_vector* v, void* params, gsl_vector* g)
{
    auto* obj = static_cast<CountedObjective*>(params);
    std::vector<double> x(v->data, v->data + v->size);
    const double h = 1e-7;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = (*obj)(x);
        x[i] = orig - h;
        const double down = (*obj)(x);
        x[i] = orig;
        gsl_vector_set(g, i, (up - down) / (2.0 * h));
    }
}

inline void gsl_value_gradient(const gsl_vector* v, void* params, double* f, gsl_vector* g)
{
    *f = gsl_value(v, params);
    gsl_gradient(v, params, g);
}

}  // namespace detail

/// Nelder-Mead simplex (GSL nmsimplex2) from `x0`, capped at max_evaluations.
inline MinimizeResult nelder_mead(const Objective& f, std::span<const double> x0, const MinimizeOptions& options = {})
{
    if (x0.empty()) {
        throw std::invalid_argument("nelder_mead: empty starting point");
    }
    gsl_set_error_handler_off();
    detail::CountedObjective counted(f);
    gsl_multimin_function fn{&detail::gsl_value, x0.size(), &counted};
    auto start = detail::to_gsl(x0);
    detail::GslVector steps(gsl_vector_alloc(x0.size()));
    gsl_vector_set_all(steps.get(), options.initial_step);

    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, x0.size()), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(solver.get(), &fn, start.get(), steps.get());

    MinimizeResult result;
    while (counted.evaluations < options.max_evaluations) {
        ++result.iterations;
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) {
            break;
        }
        const double size = gsl_multimin_fminimizer_size(solver.get());
        if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
            result.converged = true;
            break;
        }
    }
    result.x = counted.best_x;
    result.value = counted.best_value;
    result.evaluations = counted.evaluations;
    return result;
}

/// Quasi-Newton polish (GSL BFGS2) with central-difference gradients.
inline MinimizeResult bfgs_polish(const Objective& f, std::span<const double> x0, const MinimizeOptions& options = {})
{
    gsl_set_error_handler_off();
    detail::CountedObjective counted(f);
    gsl_multimin_function_fdf fn{&detail::gsl_value, &detail::gsl_gradient, &detail::gsl_value_gradient, x0.size(),
                                 &counted};
    auto start = detail::to_gsl(x0);
    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, x0.size()),
        &gsl_multimin_fdfminimizer_free);
    gsl_multimin_fdfminimizer_set(solver.get(), &fn, start.get(), 0.01, 0.1);

    MinimizeResult result;
    while (counted.evaluations < options.max_evaluations) {
        ++result.iterations;
        if (gsl_multimin_fdfminimizer_iterate(solver.get()) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_gradient(solver.get()->gradient, options.gradient_tolerance) == GSL_SUCCESS) {
            result.converged = true;
            break;
        }
    }
    result.x = counted.best_x;
    result.value = counted.best_value;
    result.evaluations = counted.evaluations;
    return result;
}

}  // namespace domino
