#include "cwbell/event_simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cwbell/errors.hpp"

namespace cwbell {

void SettingsSchedule::validate() const {
    std::int64_t prev_end = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        if (s.t_start_ns < 0 || s.t_end_ns <= s.t_start_ns)
            throw DomainError("schedule segment " + std::to_string(i) + " is empty or negative");
        if (i > 0 && s.t_start_ns < prev_end)
            throw DomainError("schedule segments overlap or are unsorted at index " +
                              std::to_string(i));
        if ((s.x != 0 && s.x != 1) || (s.y != 0 && s.y != 1))
            throw DomainError("schedule settings must be 0 or 1");
        prev_end = s.t_end_ns;
    }
}

bool SettingsSchedule::covers(std::int64_t t0_ns, std::int64_t t1_ns) const {
    std::int64_t reach = t0_ns;
    for (const Segment& s : segments) {
        if (s.t_end_ns <= reach) continue;
        if (s.t_start_ns > reach) return false;
        reach = s.t_end_ns;
        if (reach >= t1_ns) return true;
    }
    return reach >= t1_ns;
}

std::int64_t SettingsSchedule::total_ns() const {
    std::int64_t t = 0;
    for (const Segment& s : segments) t += s.t_end_ns - s.t_start_ns;
    return t;
}

SettingsSchedule SettingsSchedule::slice(std::int64_t t0_ns, std::int64_t t1_ns) const {
    SettingsSchedule out;
    for (Segment s : segments) {
        s.t_start_ns = std::max(s.t_start_ns, t0_ns);
        s.t_end_ns = std::min(s.t_end_ns, t1_ns);
        if (s.t_end_ns > s.t_start_ns) out.segments.push_back(s);
    }
    return out;
}

SettingsSchedule make_schedule(std::int64_t duration_ns, std::int64_t segment_ns,
                               std::uint64_t seed) {
    if (duration_ns <= 0 || segment_ns <= 0) throw DomainError("schedule lengths must be positive");
    Rng rng(seed, "schedule");
    SettingsSchedule s;
    std::array<int, 4> order{0, 1, 2, 3};
    std::size_t k = 0;
    for (std::int64_t t = 0; t < duration_ns; t += segment_ns, ++k) {
        if (k % 4 == 0)
            for (int i = 3; i > 0; --i)  // Fisher-Yates
                std::swap(order[i], order[static_cast<int>(rng.next() % (i + 1))]);
        const int xy = order[k % 4];
        s.segments.push_back({t, std::min(t + segment_ns, duration_ns), xy >> 1, xy & 1});
    }
    return s;
}

bool EventStream::sorted() const {
    return std::is_sorted(events.begin(), events.end(), [](const auto& l, const auto& r) {
        return l.t_ns < r.t_ns;
    });
}

void SimulationConfig::validate() const {
    model.validate();
    if (!(duration > 0.0)) throw DomainError("duration must be positive");
    if (!(jitter_sigma >= 0.0)) throw DomainError("jitter_sigma must be non-negative");
    if (!(quantization > 0.0)) throw DomainError("quantization must be positive");
    schedule.validate();
    const auto dur_ns = static_cast<std::int64_t>(std::llround(duration * 1e9));
    if (!schedule.covers(0, dur_ns)) throw DomainError("schedule does not cover the run duration");
}

std::vector<double> generate_pairs(double rate, double duration, Rng& rng) {
    if (!(rate >= 0.0)) throw DomainError("pair rate must be non-negative");
    std::vector<double> times;
    if (rate == 0.0) return times;
    times.reserve(static_cast<std::size_t>(rate * duration * 1.01 + 16));
    for (double t = rng.exponential(rate); t < duration; t += rng.exponential(rate))
        times.push_back(t);
    return times;
}

std::pair<bool, bool> sample_pair_outcome(const QuantumProbTable& t, double eta_a, double eta_b,
                                          Rng& rng) {
    // always three draws so the stream position does not depend on the outcome
    const double u = rng.uniform();
    const bool det_a = rng.bernoulli(eta_a);
    const bool det_b = rng.bernoulli(eta_b);
    int alpha = kMinus, beta = kMinus;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        acc += t.p[i >> 1][i & 1];
        if (u < acc) {
            alpha = i >> 1;
            beta = i & 1;
            break;
        }
    }
    return {alpha == kMinus && det_a, beta == kMinus && det_b};
}

EventStream simulate(const SimulationConfig& cfg) {
    cfg.validate();
    EventStream out;
    out.quantization_ns = std::max<std::int64_t>(1, std::llround(cfg.quantization * 1e9));
    out.duration_ns = std::llround(cfg.duration * 1e9);
    const std::int64_t q = out.quantization_ns;

    Rng pair_rng(cfg.rng_seed, "pairs");
    Rng outcome_rng(cfg.rng_seed, "outcomes");
    Rng jitter_rng(cfg.rng_seed, "jitter");
    Rng dark_a_rng(cfg.rng_seed, "dark_a");
    Rng dark_b_rng(cfg.rng_seed, "dark_b");

    QuantumProbTable tables[2][2];
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) tables[x][y] = quantum_probabilities(cfg.model, x, y);

    auto push = [&](double t, Channel ch) {
        const double t_ns = std::floor(t * 1e9);
        if (t_ns < 0.0 || t_ns >= static_cast<double>(out.duration_ns)) return;
        const auto ti = static_cast<std::int64_t>(t_ns);
        out.events.push_back({ti - ti % q, ch});
    };

    const auto pairs = generate_pairs(cfg.model.pair_rate, cfg.duration, pair_rng);
    const auto& segs = cfg.schedule.segments;
    std::size_t seg = 0;
    for (double t : pairs) {
        const auto t_ns = static_cast<std::int64_t>(std::floor(t * 1e9));
        while (seg + 1 < segs.size() && segs[seg].t_end_ns <= t_ns) ++seg;
        const auto [click_a, click_b] =
            sample_pair_outcome(tables[segs[seg].x][segs[seg].y], cfg.model.eta_a,
                                cfg.model.eta_b, outcome_rng);
        double ja = 0.0, jb = 0.0;
        if (cfg.jitter_sigma > 0.0) {
            ja = cfg.jitter_sigma * jitter_rng.normal();
            jb = cfg.jitter_sigma * jitter_rng.normal();
        }
        if (click_a) push(t + ja, Channel::A);
        if (click_b) push(t + jb, Channel::B);
    }
    for (double t : generate_pairs(cfg.model.dark_rate_a, cfg.duration, dark_a_rng))
        push(t, Channel::A);
    for (double t : generate_pairs(cfg.model.dark_rate_b, cfg.duration, dark_b_rng))
        push(t, Channel::B);

    std::sort(out.events.begin(), out.events.end(), [](const auto& l, const auto& r) {
        return l.t_ns != r.t_ns ? l.t_ns < r.t_ns : l.channel < r.channel;
    });
    return out;
}

}  // namespace cwbell
