#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "liqsim/errors.hpp"
#include "liqsim/event_stream.hpp"
#include "liqsim/random.hpp"

namespace liqsim {

/// Exponential-kernel Hawkes parameters: lambda(t) = base + excitation * sum_i exp(-decay (t - t_i)).
/// Negative excitation is allowed (self-damping); intensity is floored at zero.
struct HawkesParams {
    double base = 1.0;
    double excitation = 0.0;
    double decay = 1.0;

    [[nodiscard]] double branching_ratio() const { return excitation / decay; }
    [[nodiscard]] bool is_stable() const { return excitation < decay; }
};

namespace detail {

inline void validate_hawkes(const HawkesParams& p) {
    if (!(p.decay > 0.0) || !std::isfinite(p.decay)) {
        throw std::invalid_argument("Hawkes decay must be positive and finite");
    }
    if (!(p.base >= 0.0) || !std::isfinite(p.base)) {
        throw std::invalid_argument("Hawkes base rate must be nonnegative and finite");
    }
    if (!std::isfinite(p.excitation)) {
        throw std::invalid_argument("Hawkes excitation must be finite");
    }
}

} // namespace detail

inline EventStream simulate_poisson(double rate, double horizon, RngSeed seed) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("Poisson rate must be nonnegative and finite");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("Poisson horizon must be positive and finite");
    }
    std::vector<double> times;
    if (rate > 0.0) {
        auto rng = make_rng(seed);
        double t = 0.0;
        for (;;) {
            t += detail::exponential_draw(rng, rate);
            if (!times.empty() && !(t > times.back())) {
                t = std::nextafter(times.back(), std::numeric_limits<double>::infinity());
            }
            if (t > horizon) {
                break;
            }
            times.push_back(t);
        }
    }
    return EventStream(horizon, std::move(times));
}

/// Ogata thinning sample of the exponential-kernel Hawkes process.
/// Supercritical parameters (excitation >= decay) require allow_unstable.
inline EventStream simulate_hawkes(const HawkesParams& params, double horizon, RngSeed seed,
                                   bool allow_unstable = false) {
    detail::validate_hawkes(params);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("Hawkes horizon must be positive and finite");
    }
    if (!params.is_stable() && !allow_unstable) {
        throw stability_error(
            "supercritical Hawkes parameters (excitation >= decay); pass allow_unstable to proceed");
    }
    auto rng = make_rng(seed);
    std::vector<double> times;
    double t = 0.0;
    double kernel_sum = 0.0; // sum of exp(-decay (t - t_i)) over accepted events
    for (;;) {
        const double bound = params.base + std::max(0.0, params.excitation * kernel_sum);
        if (!(bound > 0.0)) {
            break;
        }
        const double wait = detail::exponential_draw(rng, bound);
        t += wait;
        if (t > horizon) {
            break;
        }
        kernel_sum *= std::exp(-params.decay * wait);
        const double lambda = std::max(0.0, params.base + params.excitation * kernel_sum);
        if (detail::canonical(rng) * bound < lambda) {
            double accepted = t;
            if (!times.empty() && !(accepted > times.back())) {
                accepted = std::nextafter(times.back(), std::numeric_limits<double>::infinity());
            }
            if (accepted > horizon) {
                break;
            }
            times.push_back(accepted);
            kernel_sum += 1.0;
        }
    }
    return EventStream(horizon, std::move(times));
}

/// Left-continuous intensity: events at exactly t are excluded.
inline double intensity_at(const EventStream& stream, const HawkesParams& params, double t) {
    detail::validate_hawkes(params);
    if (!(t >= 0.0) || t > stream.horizon()) {
        throw std::invalid_argument("intensity_at time outside [0, horizon]");
    }
    double kernel_sum = 0.0;
    for (double ti : stream.times()) {
        if (!(ti < t)) {
            break;
        }
        kernel_sum += std::exp(-params.decay * (t - ti));
    }
    return std::max(0.0, params.base + params.excitation * kernel_sum);
}

/// Exponential-kernel log likelihood with the compensator in closed form:
/// sum_i ln lambda(t_i-) - base T - (excitation/decay) sum_i (1 - exp(-decay (T - t_i))).
/// Returns -inf if any event sits at nonpositive intensity (possible when self-damping).
inline double log_likelihood(const EventStream& stream, const HawkesParams& params) {
    detail::validate_hawkes(params);
    const double T = stream.horizon();
    double sum_log = 0.0;
    double kernel_sum = 0.0;
    double prev = 0.0;
    bool first = true;
    for (double ti : stream.times()) {
        if (!first) {
            kernel_sum = (kernel_sum + 1.0) * std::exp(-params.decay * (ti - prev));
        }
        const double lambda = params.base + params.excitation * kernel_sum;
        if (!(lambda > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        sum_log += std::log(lambda);
        prev = ti;
        first = false;
    }
    double kernel_integral = 0.0;
    for (double ti : stream.times()) {
        kernel_integral += 1.0 - std::exp(-params.decay * (T - ti));
    }
    return sum_log - params.base * T - (params.excitation / params.decay) * kernel_integral;
}

struct FitOptions {
    double tolerance = 1e-8;       // stop when the loglik improvement stalls below this
    std::size_t max_iterations = 10000;
};

struct FitResult {
    HawkesParams params;
    double loglik = -std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

struct MleContext {
    const EventStream* stream;
};

inline double mle_objective(const gsl_vector* x, void* raw) {
    const auto* ctx = static_cast<const MleContext*>(raw);
    HawkesParams p;
    p.base = std::exp(gsl_vector_get(x, 0));
    p.excitation = gsl_vector_get(x, 1);
    p.decay = std::exp(gsl_vector_get(x, 2));
    const double ll = log_likelihood(*ctx->stream, p);
    if (!std::isfinite(ll)) {
        return 1e100;
    }
    return -ll;
}

} // namespace detail

/// Derivative-free local maximization of the log likelihood from init
/// (Nelder-Mead simplex on (ln base, excitation, ln decay), which enforces
/// base > 0 and decay > 0). Never returns parameters with a lower loglik
/// than init; non-convergence at the iteration cap is flagged.
inline FitResult fit_mle(const EventStream& stream, const HawkesParams& init,
                         const FitOptions& options = {}) {
    detail::validate_hawkes(init);
    if (!(init.base > 0.0)) {
        throw std::invalid_argument("fit_mle requires a strictly positive initial base rate");
    }
    if (stream.size() < 10) {
        throw std::invalid_argument("fit_mle requires at least 10 events");
    }
    gsl_set_error_handler_off(); // degenerate simplices surface as status codes, not aborts

    detail::MleContext ctx{&stream};
    gsl_multimin_function func;
    func.n = 3;
    func.f = &detail::mle_objective;
    func.params = &ctx;

    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector* step = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, std::log(init.base));
    gsl_vector_set(x, 1, init.excitation);
    gsl_vector_set(x, 2, std::log(init.decay));
    gsl_vector_set(step, 0, 0.5);
    gsl_vector_set(step, 1, 0.25);
    gsl_vector_set(step, 2, 0.5);

    gsl_multimin_fminimizer* minimizer =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
    gsl_multimin_fminimizer_set(minimizer, &func, x, step);

    FitResult result;
    double prev_f = minimizer->fval;
    std::size_t stalled = 0;
    bool converged = false;
    std::size_t iter = 0;
    while (iter < options.max_iterations) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(minimizer) != GSL_SUCCESS) {
            break;
        }
        const double size = gsl_multimin_fminimizer_size(minimizer);
        const double improvement = prev_f - minimizer->fval;
        prev_f = minimizer->fval;
        stalled = improvement < options.tolerance ? stalled + 1 : 0;
        if (size < 1e-10 || stalled >= 25) {
            converged = true;
            break;
        }
    }

    HawkesParams fitted;
    fitted.base = std::exp(gsl_vector_get(minimizer->x, 0));
    fitted.excitation = gsl_vector_get(minimizer->x, 1);
    fitted.decay = std::exp(gsl_vector_get(minimizer->x, 2));
    const double fitted_ll = log_likelihood(stream, fitted);
    const double init_ll = log_likelihood(stream, init);

    gsl_multimin_fminimizer_free(minimizer);
    gsl_vector_free(step);
    gsl_vector_free(x);

    result.iterations = iter;
    result.converged = converged;
    if (fitted_ll >= init_ll) {
        result.params = fitted;
        result.loglik = fitted_ll;
    } else {
        result.params = init;
        result.loglik = init_ll;
    }
    return result;
}

} // namespace liqsim
