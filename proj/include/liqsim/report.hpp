#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "liqsim/random.hpp"

namespace liqsim {

inline constexpr std::array<int, 5> kQuantileProbes = {10, 25, 50, 75, 100};

/// Per-scenario simulation summary: mean revenue (net of the terminal
/// haircut, and gross trade proceeds) plus quantiles of the realized trading
/// rates and inventory levels across all decision epochs of all paths.
struct SimReport {
    std::string label;
    double sigma = 0.0; // intensity jump size, echoed for panel sorting
    double kappa = 0.0;
    double revenue = 0.0;       // mean trade proceeds + terminal credit
    double revenue_gross = 0.0; // mean trade proceeds only
    double revenue_se = 0.0;    // Monte Carlo standard error of revenue
    std::array<double, 5> trade_rate_quantiles{};
    std::array<double, 5> inventory_quantiles{};
    long long n_paths = 0;
    RngSeed seed;
    std::string error; // nonempty when the scenario failed

    [[nodiscard]] bool failed() const { return !error.empty(); }
};

/// Nearest-rank quantile at probe percent p; p = 100 returns the maximum.
inline double nearest_rank_quantile(const std::vector<double>& sorted_values, int percent) {
    if (sorted_values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    const std::size_t n = sorted_values.size();
    const double rank = std::ceil(static_cast<double>(percent) * static_cast<double>(n) / 100.0);
    const std::size_t idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
    return sorted_values[std::min(idx, n - 1)];
}

inline std::array<double, 5> quantile_row(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < kQuantileProbes.size(); ++i) {
        out[i] = nearest_rank_quantile(values, kQuantileProbes[i]);
    }
    return out;
}

enum class ReportFormat { csv, json };
enum class ReportSort { label, panel };

/// Panel order puts self-damping scenarios (sigma < 0) before self-exciting
/// ones; label order is lexicographic. Sorting is stable within panels.
inline void sort_reports(std::vector<SimReport>& reports, ReportSort mode) {
    if (mode == ReportSort::label) {
        std::stable_sort(reports.begin(), reports.end(),
                         [](const SimReport& a, const SimReport& b) { return a.label < b.label; });
    } else {
        std::stable_sort(reports.begin(), reports.end(), [](const SimReport& a, const SimReport& b) {
            const int pa = a.sigma < 0.0 ? 0 : 1;
            const int pb = b.sigma < 0.0 ? 0 : 1;
            if (pa != pb) return pa < pb;
            return a.label < b.label;
        });
    }
}

namespace detail {

inline std::string sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace detail

inline void write_report_csv(const std::vector<SimReport>& reports, std::ostream& out) {
    out << "label,revenue,metric,q10,q25,q50,q75,q100\n";
    for (const SimReport& r : reports) {
        if (r.failed()) {
            continue;
        }
        const auto row = [&](const char* metric, const std::array<double, 5>& q) {
            out << r.label << ',' << detail::sig6(r.revenue) << ',' << metric;
            for (double v : q) {
                out << ',' << detail::sig6(v);
            }
            out << '\n';
        };
        row("trade_rate", r.trade_rate_quantiles);
        row("inventory", r.inventory_quantiles);
    }
}

inline nlohmann::ordered_json report_to_json(const SimReport& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["sigma"] = r.sigma;
    j["kappa"] = r.kappa;
    j["revenue"] = r.revenue;
    j["revenue_gross"] = r.revenue_gross;
    j["revenue_se"] = r.revenue_se;
    j["trade_rate_quantiles"] = r.trade_rate_quantiles;
    j["inventory_quantiles"] = r.inventory_quantiles;
    j["n_paths"] = r.n_paths;
    j["seed"] = {{"seed", r.seed.seed}, {"stream", r.seed.stream}};
    j["error"] = r.error;
    return j;
}

inline SimReport report_from_json(const nlohmann::json& j) {
    SimReport r;
    r.label = j.at("label").get<std::string>();
    r.sigma = j.at("sigma").get<double>();
    r.kappa = j.at("kappa").get<double>();
    r.revenue = j.at("revenue").get<double>();
    r.revenue_gross = j.at("revenue_gross").get<double>();
    r.revenue_se = j.at("revenue_se").get<double>();
    r.trade_rate_quantiles = j.at("trade_rate_quantiles").get<std::array<double, 5>>();
    r.inventory_quantiles = j.at("inventory_quantiles").get<std::array<double, 5>>();
    r.n_paths = j.at("n_paths").get<long long>();
    r.seed.seed = j.at("seed").at("seed").get<std::uint64_t>();
    r.seed.stream = j.at("seed").at("stream").get<std::uint64_t>();
    r.error = j.at("error").get<std::string>();
    return r;
}

inline void write_report_json(const std::vector<SimReport>& reports, std::ostream& out) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const SimReport& r : reports) {
        arr.push_back(report_to_json(r));
    }
    out << arr.dump(2) << '\n';
}

inline void write_report(const std::vector<SimReport>& reports, const std::string& path,
                         ReportFormat format) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    if (format == ReportFormat::csv) {
        write_report_csv(reports, out);
    } else {
        write_report_json(reports, out);
    }
    if (!out) {
        throw std::runtime_error("failed while writing: " + path);
    }
}

inline std::vector<SimReport> read_reports_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<SimReport> reports;
    for (const auto& j : arr) {
        reports.push_back(report_from_json(j));
    }
    return reports;
}

} // namespace liqsim
