#include "cwbell/binning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cwbell/errors.hpp"
#include "cwbell/parallel.hpp"

namespace cwbell {

namespace {

// Calls emit(a_clicked, b_clicked, x, y) once per complete bin, in time order.
template <class Emit>
void sweep(const EventStream& stream, const SettingsSchedule& schedule, std::int64_t tau_ns,
           Emit&& emit) {
    if (!stream.sorted()) throw DomainError("event stream is not sorted by timestamp");
    schedule.validate();
    const auto& ev = stream.events;
    std::size_t i = 0;
    for (const Segment& seg : schedule.segments) {
        const std::int64_t nbins = (seg.t_end_ns - seg.t_start_ns) / tau_ns;
        while (i < ev.size() && ev[i].t_ns < seg.t_start_ns) ++i;
        for (std::int64_t k = 0; k < nbins; ++k) {
            const std::int64_t end = seg.t_start_ns + (k + 1) * tau_ns;
            bool a = false, b = false;
            for (; i < ev.size() && ev[i].t_ns < end; ++i)
                (ev[i].channel == Channel::A ? a : b) = true;
            emit(a, b, seg.x, seg.y);
        }
    }
}

}  // namespace

std::uint64_t ChshEstimate::rounds() const {
    std::uint64_t n = 0;
    for (auto& bx : counts)
        for (auto& by : bx)
            for (auto& ba : by)
                for (auto c : ba) n += c;
    return n;
}

std::int64_t quantize_tau(double tau, std::int64_t quantization_ns) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    const double steps = std::round(tau * 1e9 / static_cast<double>(quantization_ns));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(steps)) * quantization_ns;
}

std::vector<RoundRecord> bin_events(const EventStream& stream, const SettingsSchedule& schedule,
                                    double tau) {
    const std::int64_t tau_ns = quantize_tau(tau, stream.quantization_ns);
    std::vector<RoundRecord> out;
    out.reserve(count_rounds(schedule, tau_ns));
    sweep(stream, schedule, tau_ns, [&](bool a, bool b, int x, int y) {
        out.push_back({static_cast<std::int8_t>(a ? -1 : 1), static_cast<std::int8_t>(b ? -1 : 1),
                       static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)});
    });
    return out;
}

ChshCounts tally(const EventStream& stream, const SettingsSchedule& schedule, double tau) {
    const std::int64_t tau_ns = quantize_tau(tau, stream.quantization_ns);
    ChshCounts c{};
    sweep(stream, schedule, tau_ns, [&](bool a, bool b, int x, int y) { ++c[x][y][a][b]; });
    return c;
}

ChshEstimate estimate(const std::vector<RoundRecord>& records) {
    ChshCounts c{};
    for (const RoundRecord& r : records) ++c[r.x][r.y][r.a < 0][r.b < 0];
    return estimate_from_counts(c);
}

ChshEstimate estimate_from_counts(const ChshCounts& counts) {
    ChshEstimate est;
    est.counts = counts;
    double var = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const auto& c = counts[x][y];
            const std::uint64_t n = c[0][0] + c[0][1] + c[1][0] + c[1][1];
            if (n == 0)
                throw EstimationError("no rounds for setting pair (" + std::to_string(x) + "," +
                                      std::to_string(y) + ")");
            const auto same = static_cast<std::int64_t>(c[0][0] + c[1][1]);
            const auto diff = static_cast<std::int64_t>(c[0][1] + c[1][0]);
            const double e = static_cast<double>(same - diff) / static_cast<double>(n);
            est.e[x][y] = e;
            var += (1.0 - e * e) / static_cast<double>(n);
        }
    est.s = est.e[0][0] + est.e[0][1] + est.e[1][0] - est.e[1][1];
    est.sigma_s = std::sqrt(var);
    return est;
}

std::vector<TauScanRow> scan_tau(const EventStream& stream, const SettingsSchedule& schedule,
                                 const std::vector<double>& taus, unsigned workers) {
    std::vector<TauScanRow> rows(taus.size());
    parallel_for(taus.size(), workers, [&](std::size_t i) {
        TauScanRow& r = rows[i];
        r.tau_ns = quantize_tau(taus[i], stream.quantization_ns);
        r.tau = static_cast<double>(r.tau_ns) * 1e-9;
        r.est = estimate_from_counts(tally(stream, schedule, r.tau));
    });
    return rows;
}

std::uint64_t count_rounds(const SettingsSchedule& schedule, std::int64_t tau_ns) {
    std::uint64_t n = 0;
    for (const Segment& s : schedule.segments)
        n += static_cast<std::uint64_t>((s.t_end_ns - s.t_start_ns) / tau_ns);
    return n;
}

}  // namespace cwbell
