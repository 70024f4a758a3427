#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liqsim {

enum class ImpactFamily { power, exponential };

/// Map from trading rate to the drift fed into the arrival intensity:
/// power gamma^alpha or exponential exp(alpha gamma), alpha > 0 acting as
/// inverse market liquidity.
struct ImpactFunction {
    ImpactFamily family = ImpactFamily::exponential;
    double alpha = 1.0;
};

inline double impact_value(const ImpactFunction& f, double gamma) {
    if (!(f.alpha > 0.0) || !std::isfinite(f.alpha)) {
        throw std::invalid_argument("impact alpha must be positive and finite");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("trading rate must be nonnegative and finite");
    }
    return f.family == ImpactFamily::power ? std::pow(gamma, f.alpha)
                                           : std::exp(f.alpha * gamma);
}

/// State of the impacted arrival intensity following
/// d lambda = (f(gamma) - decay * lambda) dt + excitation dN.
struct ImpactedIntensityState {
    double level = 1.0;      // current lambda, kept >= 0
    double decay = 1.0;      // kappa > 0
    double excitation = 0.0; // jump size sigma, may be negative
    ImpactFunction impact;
};

namespace detail {

inline void validate_intensity_state(const ImpactedIntensityState& s) {
    if (!(s.decay > 0.0) || !std::isfinite(s.decay)) {
        throw std::invalid_argument("intensity decay kappa must be positive and finite");
    }
    if (!(s.level >= 0.0) || !std::isfinite(s.level)) {
        throw std::invalid_argument("intensity level must be nonnegative and finite");
    }
    if (!std::isfinite(s.excitation)) {
        throw std::invalid_argument("intensity excitation sigma must be finite");
    }
}

} // namespace detail

/// Exact solution of the drift part over dt with gamma held constant:
/// lambda <- f(gamma)/kappa + (lambda - f(gamma)/kappa) exp(-kappa dt).
inline ImpactedIntensityState evolve_between_jumps(ImpactedIntensityState state, double gamma,
                                                   double dt) {
    detail::validate_intensity_state(state);
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("evolve_between_jumps requires dt >= 0");
    }
    const double fixed_point = impact_value(state.impact, gamma) / state.decay;
    state.level = std::max(
        0.0, fixed_point + (state.level - fixed_point) * std::exp(-state.decay * dt));
    return state;
}

struct JumpResult {
    ImpactedIntensityState state;
    bool clamped = false; // sigma drove the level negative; floored at zero
};

/// Applies the + sigma dN term at an arrival.
inline JumpResult apply_jump(ImpactedIntensityState state) {
    detail::validate_intensity_state(state);
    const double raw = state.level + state.excitation;
    state.level = std::max(0.0, raw);
    return {state, raw < 0.0};
}

/// Long-run intensity level under sustained trading: (1 + alpha gamma_T) / kappa.
inline double permanent_intensity(double alpha, double gamma_T, double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("permanent_intensity requires kappa > 0");
    }
    return (1.0 + alpha * gamma_T) / kappa;
}

/// Short-horizon intensity response exp(-kappa t + alpha gamma_eps).
inline double instantaneous_intensity(double alpha, double gamma_eps, double kappa, double t) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("instantaneous_intensity requires kappa > 0");
    }
    if (!(t >= 0.0)) {
        throw std::invalid_argument("instantaneous_intensity requires t >= 0");
    }
    return std::exp(-kappa * t + alpha * gamma_eps);
}

} // namespace liqsim
