#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cwbell/event_simulator.hpp"

namespace cwbell {

struct RoundRecord {
    std::int8_t a = 1, b = 1;  // +1 no click, -1 click
    std::uint8_t x = 0, y = 0;
    friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// counts[x][y][ia][ib], ia/ib = 0 for +1 and 1 for -1
using ChshCounts = std::array<std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2>, 2>;

struct ChshEstimate {
    std::array<std::array<double, 2>, 2> e{};
    double s = 0.0;
    double sigma_s = 0.0;
    ChshCounts counts{};
    std::uint64_t rounds() const;
};

// Bin width snapped to the stream's quantization grid (at least one step).
std::int64_t quantize_tau(double tau, std::int64_t quantization_ns);

std::vector<RoundRecord> bin_events(const EventStream& stream, const SettingsSchedule& schedule,
                                    double tau);

// Same binning as bin_events but only accumulates counts.
ChshCounts tally(const EventStream& stream, const SettingsSchedule& schedule, double tau);

ChshEstimate estimate(const std::vector<RoundRecord>& records);
ChshEstimate estimate_from_counts(const ChshCounts& counts);

struct TauScanRow {
    double tau = 0.0;          // s, after snapping
    std::int64_t tau_ns = 0;
    ChshEstimate est;
};

std::vector<TauScanRow> scan_tau(const EventStream& stream, const SettingsSchedule& schedule,
                                 const std::vector<double>& taus, unsigned workers = 1);

// Number of complete bins of width tau_ns in the schedule.
std::uint64_t count_rounds(const SettingsSchedule& schedule, std::int64_t tau_ns);

}  // namespace cwbell
