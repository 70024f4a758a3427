#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqsim/price_distribution.hpp"

namespace liqsim {

/// Order prices resting in the book at time t, with L orders carried over
/// unexecuted from the previous interval.
struct BookSnapshot {
    std::vector<double> prices;
    double t = 0.0;
    long long unexecuted_count = 0;
};

/// The `theorem` variant groups the elapsed-time factor as 1 - F(Y) t; the
/// `proof` variant uses (1 - F(Y)) t, the form the generating-function
/// derivation produces. They coincide at t = 1.
enum class ExceedanceVariant { theorem, proof };

struct ExceedanceModel {
    double rate = 1.0;           // lambda
    double elapsed = 1.0;        // t
    double threshold_cdf = 0.5;  // F(Y)
    long long carried = 0;       // L
    ExceedanceVariant variant = ExceedanceVariant::proof;
};

struct ExceedanceRate {
    double value = 0.0;
    bool clamped = false; // formula went negative and was floored at zero
};

namespace detail {

inline void validate_exceedance(const ExceedanceModel& m) {
    if (!(m.rate >= 0.0) || !std::isfinite(m.rate)) {
        throw std::invalid_argument("exceedance rate lambda must be nonnegative and finite");
    }
    if (!(m.elapsed >= 0.0) || !std::isfinite(m.elapsed)) {
        throw std::invalid_argument("exceedance elapsed time must be nonnegative and finite");
    }
    if (!(m.threshold_cdf >= 0.0 && m.threshold_cdf <= 1.0)) {
        throw std::invalid_argument("threshold cdf F(Y) must lie in [0, 1]");
    }
    if (m.carried < 0) {
        throw std::invalid_argument("carried order count L must be nonnegative");
    }
}

/// lambda^(L+1) / (L+1)! without overflow.
inline double poisson_tail_term(double lambda, long long L) {
    if (lambda == 0.0) {
        return 0.0;
    }
    const double n = static_cast<double>(L) + 1.0;
    return std::exp(n * std::log(lambda) - std::lgamma(n + 1.0));
}

} // namespace detail

/// Effective Poisson rate of unexecuted orders priced above the threshold:
/// lambda [bracket - ln(exp(lambda F(Y)) - lambda^(L+1)/(L+1)!)], where the
/// bracket is 1 - F(Y) t (theorem) or (1 - F(Y)) t (proof). A negative result
/// is clamped to zero and flagged.
inline ExceedanceRate exceedance_rate(const ExceedanceModel& model) {
    detail::validate_exceedance(model);
    const double F = model.threshold_cdf;
    const double term = detail::poisson_tail_term(model.rate, model.carried);
    const double ln_arg = std::exp(model.rate * F) - term;
    if (!(ln_arg > 0.0)) {
        throw std::domain_error(
            "exceedance_rate: exp(lambda F(Y)) - lambda^(L+1)/(L+1)! is not positive");
    }
    const double bracket = model.variant == ExceedanceVariant::theorem
                               ? 1.0 - F * model.elapsed
                               : (1.0 - F) * model.elapsed;
    const double raw = model.rate * (bracket - std::log(ln_arg));
    return {std::max(0.0, raw), raw < 0.0};
}

/// Poisson pmf exp(-lambda_y) lambda_y^k / k!.
inline double exceedance_pmf(long long k, double lambda_y) {
    if (k < 0) {
        throw std::invalid_argument("exceedance_pmf order index k must be nonnegative");
    }
    if (!(lambda_y >= 0.0) || !std::isfinite(lambda_y)) {
        throw std::invalid_argument("exceedance_pmf rate must be nonnegative and finite");
    }
    if (lambda_y == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(lambda_y) - lambda_y - std::lgamma(kd + 1.0));
}

/// Ascending order statistics; stable for ties.
inline std::vector<double> order_statistics(std::vector<double> prices) {
    if (prices.empty()) {
        throw std::invalid_argument("order_statistics requires a nonempty price list");
    }
    std::stable_sort(prices.begin(), prices.end());
    return prices;
}

/// Probability-weighted sum of the top-k order statistics. The i-th best
/// order (i = 1 is the maximum) is weighted by the cumulative exceedance
/// probability P(U <= k - i).
inline double expected_boundary(const BookSnapshot& snapshot, long long k,
                                const ExceedanceModel& model) {
    const long long n = static_cast<long long>(snapshot.prices.size());
    if (k < 1 || k > n) {
        throw std::invalid_argument("expected_boundary requires 1 <= k <= book size");
    }
    const std::vector<double> sorted = order_statistics(snapshot.prices);
    const double lambda_y = exceedance_rate(model).value;

    std::vector<double> cdf(static_cast<std::size_t>(k));
    double acc = 0.0;
    for (long long j = 0; j < k; ++j) {
        acc += exceedance_pmf(j, lambda_y);
        cdf[static_cast<std::size_t>(j)] = std::min(acc, 1.0);
    }

    double total = 0.0;
    for (long long rank = 1; rank <= k; ++rank) {
        const double weight = cdf[static_cast<std::size_t>(k - rank)];
        total += weight * sorted[static_cast<std::size_t>(n - rank)];
    }
    return total;
}

/// Depth payoff h(t, k): positive part of realized top-k sum minus its
/// expected boundary.
inline double depth_payoff(const BookSnapshot& snapshot, long long k,
                           const ExceedanceModel& model) {
    const long long n = static_cast<long long>(snapshot.prices.size());
    if (k < 1 || k > n) {
        throw std::invalid_argument("depth_payoff requires 1 <= k <= book size");
    }
    const std::vector<double> sorted = order_statistics(snapshot.prices);
    double realized = 0.0;
    for (long long rank = 1; rank <= k; ++rank) {
        realized += sorted[static_cast<std::size_t>(n - rank)];
    }
    return std::max(0.0, realized - expected_boundary(snapshot, k, model));
}

inline void write_book_snapshot_csv(const BookSnapshot& snapshot, std::ostream& out) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", snapshot.t);
    out << "# t=" << buf << '\n';
    out << "# L=" << snapshot.unexecuted_count << '\n';
    out << "price\n";
    for (double p : snapshot.prices) {
        std::snprintf(buf, sizeof(buf), "%.17g", p);
        out << buf << '\n';
    }
}

inline BookSnapshot read_book_snapshot_csv(std::istream& in) {
    BookSnapshot snapshot;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# t=", 0) == 0) {
            snapshot.t = std::strtod(line.c_str() + 4, nullptr);
        } else if (line.rfind("# L=", 0) == 0) {
            snapshot.unexecuted_count = std::strtoll(line.c_str() + 4, nullptr, 10);
        } else if (line == "price") {
            saw_header = true;
        } else {
            if (!saw_header) {
                throw std::invalid_argument("book snapshot CSV missing 'price' header");
            }
            snapshot.prices.push_back(std::strtod(line.c_str(), nullptr));
        }
    }
    if (!saw_header) {
        throw std::invalid_argument("book snapshot CSV missing 'price' header");
    }
    if (snapshot.unexecuted_count < 0) {
        throw std::invalid_argument("book snapshot carried count L must be nonnegative");
    }
    return snapshot;
}

inline void write_book_snapshot_csv(const BookSnapshot& snapshot, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    write_book_snapshot_csv(snapshot, out);
}

inline BookSnapshot read_book_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    return read_book_snapshot_csv(in);
}

} // namespace liqsim
