#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cwbell/physics_model.hpp"
#include "cwbell/rng.hpp"

namespace cwbell {

enum class Channel : std::uint8_t { A = 0, B = 1 };

struct DetectionEvent {
    std::int64_t t_ns = 0;
    Channel channel = Channel::A;
    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct Segment {
    std::int64_t t_start_ns = 0;
    std::int64_t t_end_ns = 0;
    int x = 0, y = 0;
    friend bool operator==(const Segment&, const Segment&) = default;
};

struct SettingsSchedule {
    std::vector<Segment> segments;

    // sorted, non-overlapping, non-empty segments with binary settings
    void validate() const;
    bool covers(std::int64_t t0_ns, std::int64_t t1_ns) const;
    std::int64_t total_ns() const;
    // Restriction to [t0, t1); segments are clipped at the cut points.
    SettingsSchedule slice(std::int64_t t0_ns, std::int64_t t1_ns) const;
};

// Back-to-back segments of fixed length; each group of four uses the four
// setting pairs in an order drawn from `seed`.
SettingsSchedule make_schedule(std::int64_t duration_ns, std::int64_t segment_ns,
                               std::uint64_t seed);

struct EventStream {
    std::int64_t quantization_ns = 2;
    std::int64_t duration_ns = 0;
    std::vector<DetectionEvent> events;
    bool sorted() const;
};

struct SimulationConfig {
    SourceModel model;
    double duration = 1.0;        // s
    double jitter_sigma = 170e-9; // s, Gaussian standard deviation per detection
    double quantization = 2e-9;   // s
    std::uint64_t rng_seed = 1;
    SettingsSchedule schedule;
    void validate() const;
};

std::vector<double> generate_pairs(double rate, double duration, Rng& rng);

std::pair<bool, bool> sample_pair_outcome(const QuantumProbTable& t, double eta_a,
                                          double eta_b, Rng& rng);

EventStream simulate(const SimulationConfig& cfg);

}  // namespace cwbell
