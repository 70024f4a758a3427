#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace liqsim {

/// Jump times of a simulated point process on [0, horizon].
/// Times are strictly increasing; an empty stream is valid.
class EventStream {
public:
    EventStream() = default;

    EventStream(double horizon, std::vector<double> times)
        : horizon_(horizon), times_(std::move(times)) {
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
            throw std::invalid_argument("EventStream horizon must be positive and finite");
        }
        double prev = -1.0;
        for (double t : times_) {
            if (!std::isfinite(t) || t < 0.0 || t > horizon_) {
                throw std::invalid_argument("EventStream times must lie in [0, horizon]");
            }
            if (!(t > prev)) {
                throw std::invalid_argument("EventStream times must be strictly increasing");
            }
            prev = t;
        }
    }

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }

private:
    double horizon_ = 1.0;
    std::vector<double> times_;
};

inline void write_event_stream_csv(const EventStream& stream, std::ostream& out) {
    out << "index,time\n";
    char buf[40];
    for (std::size_t i = 0; i < stream.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", stream.times()[i]);
        out << i << ',' << buf << '\n';
    }
}

inline void write_event_stream_csv(const EventStream& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    write_event_stream_csv(stream, out);
}

/// Reads the two-column `index,time` format. The horizon is not part of the
/// format; pass it explicitly or the last event time is used.
inline EventStream read_event_stream_csv(std::istream& in,
                                         std::optional<double> horizon = std::nullopt) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,time", 0) != 0) {
        throw std::invalid_argument("event stream CSV must start with header 'index,time'");
    }
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("event stream CSV row missing comma: " + line);
        }
        const char* begin = line.c_str() + comma + 1;
        char* end = nullptr;
        const double t = std::strtod(begin, &end);
        if (end == begin) {
            throw std::invalid_argument("event stream CSV row has no time value: " + line);
        }
        times.push_back(t);
    }
    const double h = horizon.value_or(times.empty() ? 1.0 : times.back());
    return EventStream(h, std::move(times));
}

inline EventStream read_event_stream_csv(const std::string& path,
                                         std::optional<double> horizon = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    return read_event_stream_csv(in, horizon);
}

} // namespace liqsim
