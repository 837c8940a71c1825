#include "cwbell/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cwbell/errors.hpp"
#include "cwbell/parallel.hpp"

namespace cwbell {

namespace {

constexpr std::int64_t kMinOutput = 6;  // the seed-length formulas need m > 2e

RoundRecord make_record(int ia, int ib, int x, int y) {
    RoundRecord r;
    r.a = ia ? -1 : 1;
    r.b = ib ? -1 : 1;
    r.x = static_cast<std::uint8_t>(x);
    r.y = static_cast<std::uint8_t>(y);
    return r;
}

BitString read_bits(BitSource& src, std::uint64_t n) {
    BitString b(n);
    for (std::uint64_t i = 0; i < n; ++i) b.set(i, src.next_bit());
    return b;
}

void extract_if_passed(ProtocolRun& run, const std::vector<RoundRecord>& recs,
                       const ProtocolConfig& cfg, BitSource& seed) {
    run.m = cfg.m;
    if (run.status != RunStatus::passed || cfg.m < kMinOutput) return;
    run.spec = ExtractorSpec::from_budget(run.n, static_cast<std::uint64_t>(cfg.m), cfg.budget.eps_1);
    const BitString z = read_bits(seed, run.spec.design_d);
    run.seed_bits = run.spec.design_d;
    run.output = trevisan_extract(outcome_string(recs), z, run.spec, {cfg.workers});
}

}  // namespace

int w_chsh(int a, int b, int x, int y) { return ((a ^ b) == (x & y)) ? 1 : 0; }

ModelDevice::ModelDevice(const SourceModel& model, double tau, std::uint64_t seed)
    : rng_(seed, "outcomes") {
    const double mu = model.pair_rate * tau;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) dist_[x][y] = outcome_distribution(model, x, y, mu, tau);
    s_ = dist_[0][0].correlator() + dist_[0][1].correlator() + dist_[1][0].correlator() -
         dist_[1][1].correlator();
}

RoundRecord ModelDevice::play(int x, int y) {
    const auto& p = dist_[x][y].p;
    const double u = rng_.uniform();
    double acc = p[0][0];
    if (u < acc) return make_record(0, 0, x, y);
    acc += p[0][1];
    if (u < acc) return make_record(0, 1, x, y);
    acc += p[1][0];
    if (u < acc) return make_record(1, 0, x, y);
    return make_record(1, 1, x, y);
}

RoundRecord ClassicalDevice::play(int x, int y) { return make_record(0, 0, x, y); }

RoundRecord RandomizedDevice::play(int x, int y) {
    const int a = rng_.bit();
    return make_record(a, rng_.bit(), x, y);
}

ProtocolConfig preregister(double omega_exp, double tau, std::uint64_t n, double gamma,
                           double eps_c, double eps_s) {
    if (n < 1) throw DomainError("protocol needs at least one round");
    ProtocolConfig cfg;
    const double nd = static_cast<double>(n);
    cfg.budget = epsilon_budget(nd, gamma, eps_c, eps_s);
    cfg.params = {gamma, omega_exp, cfg.budget.delta_est, nd, tau};
    const RateResult r = compute_rates(8.0 * (omega_exp - 0.5), tau, nd, gamma, eps_c, eps_s);
    cfg.m = r.m >= kMinOutput ? r.m : 0;
    return cfg;
}

double abort_threshold(const ProtocolParams& p) {
    return (p.omega_exp * p.gamma - p.delta_est) * p.n;
}

BitString outcome_string(const std::vector<RoundRecord>& rounds) {
    BitString s(2 * rounds.size());
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        s.set(2 * i, outcome_bit(rounds[i].a));
        s.set(2 * i + 1, outcome_bit(rounds[i].b));
    }
    return s;
}

ProtocolRun run_protocol(RoundDevice& device, const ProtocolConfig& cfg, BitSource& seed) {
    const ProtocolParams& p = cfg.params;
    if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
    if (!(p.n >= 1.0) || std::isinf(p.n)) throw DomainError("protocol needs a finite n >= 1");
    const auto n = static_cast<std::uint64_t>(p.n);

    ProtocolRun run;
    run.params = p;
    run.budget = cfg.budget;
    run.n = n;
    run.threshold = abort_threshold(p);
    if (cfg.keep_rounds) run.rounds.reserve(n);

    std::vector<RoundRecord> recs;
    recs.reserve(n);
    std::unique_ptr<BernoulliSequenceSampler> sampler;
    if (p.gamma < 1.0) sampler = std::make_unique<BernoulliSequenceSampler>(p.gamma, cfg.sampling_block);

    for (std::uint64_t i = 0; i < n; ++i) {
        ProtocolRound r;
        r.t = sampler ? static_cast<std::uint8_t>(sampler->next(seed)) : 1;
        int x = 0, y = 0;
        if (r.t) {
            x = seed.next_bit();
            y = seed.next_bit();
            run.input_bits += 2;
        }
        r.rec = device.play(x, y);
        if (r.t) {
            r.c = static_cast<std::int8_t>(w_chsh(outcome_bit(r.rec.a), outcome_bit(r.rec.b), x, y));
            run.score += static_cast<std::uint64_t>(r.c);
            ++run.test_rounds;
        }
        recs.push_back(r.rec);
        if (cfg.keep_rounds) run.rounds.push_back(r);
    }
    if (sampler) run.sampling_bits = sampler->consumed();
    run.sampling_within_bound =
        static_cast<double>(run.sampling_bits) <= 6.0 * binary_entropy(p.gamma) * p.n || p.gamma == 1.0;

    if (static_cast<double>(run.score) < run.threshold) {
        run.status = RunStatus::aborted;
        run.abort_reason = "score_below_threshold";
    }
    extract_if_passed(run, recs, cfg, seed);
    return run;
}

ProtocolRun run_protocol_recorded(const std::vector<RoundRecord>& rounds,
                                  const ProtocolConfig& cfg, BitSource& seed) {
    const ProtocolParams& p = cfg.params;
    if (p.gamma != 1.0) throw DomainError("recorded rounds are all test rounds (gamma = 1)");
    if (static_cast<double>(rounds.size()) != p.n)
        throw LengthMismatch("protocol expects " + std::to_string(static_cast<std::uint64_t>(p.n)) +
                             " rounds, got " + std::to_string(rounds.size()));
    ProtocolRun run;
    run.params = p;
    run.budget = cfg.budget;
    run.n = rounds.size();
    run.test_rounds = run.n;
    run.threshold = abort_threshold(p);

    // chunked scoring, reduced in chunk order
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(rounds.size() / 4096 + 1, 64));
    std::vector<std::uint64_t> part(chunks, 0);
    parallel_for(chunks, cfg.workers, [&](std::size_t c) {
        const std::size_t lo = rounds.size() * c / chunks, hi = rounds.size() * (c + 1) / chunks;
        std::uint64_t s = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& r = rounds[i];
            s += static_cast<std::uint64_t>(w_chsh(outcome_bit(r.a), outcome_bit(r.b), r.x, r.y));
        }
        part[c] = s;
    });
    for (auto s : part) run.score += s;

    if (cfg.keep_rounds) {
        run.rounds.resize(rounds.size());
        for (std::size_t i = 0; i < rounds.size(); ++i) {
            const auto& r = rounds[i];
            run.rounds[i] = {1, r, static_cast<std::int8_t>(w_chsh(outcome_bit(r.a), outcome_bit(r.b), r.x, r.y))};
        }
    }
    if (static_cast<double>(run.score) < run.threshold) {
        run.status = RunStatus::aborted;
        run.abort_reason = "score_below_threshold";
    }
    extract_if_passed(run, rounds, cfg, seed);
    return run;
}

SettingsSchedule remainder_schedule(const SettingsSchedule& schedule, std::int64_t split_ns) {
    if (schedule.segments.empty()) return schedule;
    return schedule.slice(split_ns, schedule.segments.back().t_end_ns);
}

CalibrationResult calibrate(const EventStream& stream, const SettingsSchedule& schedule,
                            const std::vector<double>& tau_grid, const CalibrationOptions& opt) {
    if (!(opt.gamma_calib > 0.0 && opt.gamma_calib < 1.0))
        throw DomainError("calibration fraction must lie in (0,1)");
    if (!(opt.eps_calib > 0.0 && opt.eps_calib < 1.0)) throw DomainError("eps_calib must lie in (0,1)");
    if (tau_grid.empty()) throw DomainError("empty bin-width grid");
    if (schedule.segments.empty()) throw DomainError("empty schedule");
    schedule.validate();

    CalibrationResult res;
    res.gamma_calib = opt.gamma_calib;
    res.eps_calib = opt.eps_calib;
    const std::int64_t t0 = schedule.segments.front().t_start_ns;
    const std::int64_t t1 = schedule.segments.back().t_end_ns;
    res.split_ns = t0 + static_cast<std::int64_t>(std::floor(opt.gamma_calib * static_cast<double>(t1 - t0)));
    const SettingsSchedule head = schedule.slice(t0, res.split_ns);
    const SettingsSchedule tail = remainder_schedule(schedule, res.split_ns);

    const auto scan = scan_tau(stream, head, tau_grid, opt.workers);
    res.rows.resize(scan.size());
    parallel_for(scan.size(), opt.workers, [&](std::size_t i) {
        CalibrationRow& row = res.rows[i];
        row.tau = scan[i].tau;
        row.tau_ns = scan[i].tau_ns;
        row.est = scan[i].est;
        row.n_calib = row.est.rounds();
        row.n_remaining = count_rounds(tail, row.tau_ns);
        if (row.n_calib == 0 || row.n_remaining == 0) return;
        row.w_calib = winning_probability(row.est.s);
        row.delta_calib = std::sqrt(std::log(1.0 / opt.eps_calib) /
                                    (2.0 * static_cast<double>(row.n_remaining)));
        row.w_exp = row.w_calib - row.delta_calib;
        row.s_exp = 8.0 * (row.w_exp - 0.5);
        row.m_pred = compute_rates(row.s_exp, row.tau, static_cast<double>(row.n_remaining), 1.0,
                                   opt.eps_c, opt.eps_s)
                         .m;
    });

    const CalibrationRow* best = nullptr;
    for (const auto& row : res.rows)
        if (!best || row.m_pred > best->m_pred) best = &row;
    if (best->m_pred < kMinOutput) {
        double s_max = -4.0;
        for (const auto& row : res.rows) s_max = std::max(s_max, row.est.s);
        throw NoViolation("no bin width predicts certified output (largest S_calib=" +
                          std::to_string(s_max) + ")");
    }
    res.tau_star = best->tau;
    res.tau_star_ns = best->tau_ns;
    res.s_calib = best->est.s;
    res.w_calib = best->w_calib;
    res.delta_calib = best->delta_calib;
    res.w_exp = best->w_exp;
    res.m_pred = best->m_pred;
    res.n_remaining = best->n_remaining;
    return res;
}

EndToEndReport analyze_recorded(const EventStream& stream, const SettingsSchedule& schedule,
                                const std::vector<double>& tau_grid, const CalibrationOptions& calib,
                                BitSource& seed, const BatteryOptions& battery) {
    EndToEndReport rep;
    rep.events = stream.events.size();
    rep.calib = calibrate(stream, schedule, tau_grid, calib);

    const SettingsSchedule tail = remainder_schedule(schedule, rep.calib.split_ns);
    const auto recs = bin_events(stream, tail, rep.calib.tau_star);
    rep.remainder = estimate(recs);
    ProtocolConfig pc = preregister(rep.calib.w_exp, rep.calib.tau_star, recs.size(), 1.0,
                                    calib.eps_c, calib.eps_s);
    pc.keep_rounds = false;
    pc.workers = calib.workers;
    rep.run = run_protocol_recorded(recs, pc, seed);

    BatteryOptions bo = battery;
    bo.workers = calib.workers;
    const std::size_t len = bo.sequence_len ? bo.sequence_len : rep.run.output.size() / bo.sequences;
    if (len >= 100 && len * bo.sequences <= rep.run.output.size()) {
        bo.sequence_len = len;
        rep.stats = run_battery(rep.run.output, bo);
    }
    return rep;
}

EndToEndReport end_to_end(const EndToEndConfig& cfg) {
    const EventStream stream = simulate(cfg.sim);
    RngBitSource seed(cfg.seed_bits_seed);
    return analyze_recorded(stream, cfg.sim.schedule, cfg.tau_grid, cfg.calib, seed, cfg.battery);
}

}  // namespace cwbell
