#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "liqsim/random.hpp"

namespace liqsim {

/// Order-price / jump-mark distribution F. Uniform(a,b) and Lognormal(mu,s)
/// are supported; both expose an analytic cdf and a seeded sampler.
class PriceDistribution {
public:
    enum class Family { uniform, lognormal };

    static PriceDistribution uniform(double a, double b) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
            throw std::invalid_argument("uniform distribution requires finite a < b");
        }
        return PriceDistribution(Family::uniform, a, b);
    }

    static PriceDistribution lognormal(double mu, double s) {
        if (!(s > 0.0) || !std::isfinite(mu) || !std::isfinite(s)) {
            throw std::invalid_argument("lognormal distribution requires finite mu and s > 0");
        }
        return PriceDistribution(Family::lognormal, mu, s);
    }

    [[nodiscard]] double cdf(double x) const {
        if (family_ == Family::uniform) {
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        }
        if (!(x > 0.0)) return 0.0;
        return 0.5 * std::erfc(-(std::log(x) - a_) / (b_ * 1.4142135623730950488));
    }

    [[nodiscard]] double sample(std::mt19937_64& rng) const {
        if (family_ == Family::uniform) {
            return a_ + (b_ - a_) * detail::canonical(rng);
        }
        return std::exp(a_ + b_ * detail::standard_normal(rng));
    }

    [[nodiscard]] Family family() const noexcept { return family_; }
    /// Lower bound for uniform, mu for lognormal.
    [[nodiscard]] double param_a() const noexcept { return a_; }
    /// Upper bound for uniform, s for lognormal.
    [[nodiscard]] double param_b() const noexcept { return b_; }

private:
    PriceDistribution(Family family, double a, double b) : family_(family), a_(a), b_(b) {}

    Family family_;
    double a_;
    double b_;
};

} // namespace liqsim
