#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cwbell/binning.hpp"
#include "cwbell/bitstring.hpp"
#include "cwbell/event_simulator.hpp"
#include "cwbell/extractor.hpp"
#include "cwbell/physics_model.hpp"
#include "cwbell/rates.hpp"
#include "cwbell/rng.hpp"
#include "cwbell/stat_tests.hpp"

namespace cwbell {

// Game winning condition with outcomes relabeled +1 -> 0, -1 -> 1.
int w_chsh(int a, int b, int x, int y);
inline int outcome_bit(std::int8_t v) { return v < 0 ? 1 : 0; }

// ---- devices answering one round at a time ----

class RoundDevice {
public:
    virtual ~RoundDevice() = default;
    virtual RoundRecord play(int x, int y) = 0;
};

// i.i.d. rounds drawn from the model's outcome distribution at mu = rate * tau.
class ModelDevice : public RoundDevice {
public:
    ModelDevice(const SourceModel& model, double tau, std::uint64_t seed);
    RoundRecord play(int x, int y) override;
    double expected_s() const { return s_; }

private:
    std::array<std::array<OutcomeDistribution, 2>, 2> dist_{};
    double s_ = 0.0;
    Rng rng_;
};

// Local deterministic strategy a = b = +1: wins with probability 3/4 (S = 2).
class ClassicalDevice : public RoundDevice {
public:
    RoundRecord play(int x, int y) override;
};

// Outcomes drawn uniformly, independent of the inputs (S = 0).
class RandomizedDevice : public RoundDevice {
public:
    explicit RandomizedDevice(std::uint64_t seed) : rng_(seed, "outcomes") {}
    RoundRecord play(int x, int y) override;

private:
    Rng rng_;
};

// ---- protocol ----

struct ProtocolRound {
    std::uint8_t t = 0;
    RoundRecord rec;
    std::int8_t c = -1;  // score when t = 1, otherwise -1
};

enum class RunStatus { passed, aborted };

struct ProtocolConfig {
    ProtocolParams params;   // gamma, omega_exp, delta_est, n, tau
    SecurityBudget budget;
    std::int64_t m = 0;      // pre-registered output length
    bool keep_rounds = true;
    std::size_t sampling_block = 32;
    unsigned workers = 1;
};

// Budget and m fixed before any round is seen, from the expected winning
// probability and the planned number of rounds.
ProtocolConfig preregister(double omega_exp, double tau, std::uint64_t n, double gamma,
                           double eps_c, double eps_s);

struct ProtocolRun {
    ProtocolParams params;
    SecurityBudget budget;
    std::vector<ProtocolRound> rounds;
    RunStatus status = RunStatus::passed;
    std::string abort_reason;  // empty when passed

    std::uint64_t n = 0;
    std::uint64_t test_rounds = 0;
    std::uint64_t score = 0;
    double threshold = 0.0;

    std::uint64_t sampling_bits = 0;  // spent on T_i
    std::uint64_t input_bits = 0;     // spent on test-round settings
    std::uint64_t seed_bits = 0;      // extractor seed
    bool sampling_within_bound = true;  // sampling_bits <= 6 h(gamma) n

    std::int64_t m = 0;
    ExtractorSpec spec;
    BitString output;

    std::uint64_t bits_consumed() const { return sampling_bits + input_bits + seed_bits; }
};

// Abort iff score < (omega_exp * gamma - delta_est) n.
double abort_threshold(const ProtocolParams& p);

// Rounds played live against a device; T_i, X_i, Y_i and the extractor seed all
// come from `seed`.
ProtocolRun run_protocol(RoundDevice& device, const ProtocolConfig& cfg, BitSource& seed);

// Recorded rounds (settings fixed by the data), every round a test round
// (gamma = 1). Only the extractor seed is read from `seed`.
ProtocolRun run_protocol_recorded(const std::vector<RoundRecord>& rounds,
                                  const ProtocolConfig& cfg, BitSource& seed);

// Outcome string a_1 b_1 a_2 b_2 ...
BitString outcome_string(const std::vector<RoundRecord>& rounds);

// ---- calibration ----

struct CalibrationRow {
    double tau = 0.0;
    std::int64_t tau_ns = 0;
    ChshEstimate est;
    std::uint64_t n_calib = 0, n_remaining = 0;
    double w_calib = 0.0, delta_calib = 0.0, w_exp = 0.0, s_exp = 0.0;
    std::int64_t m_pred = 0;
};

struct CalibrationResult {
    double gamma_calib = 0.0;
    double eps_calib = 0.0;
    std::int64_t split_ns = 0;  // calibration data is [start, split)
    double tau_star = 0.0;
    std::int64_t tau_star_ns = 0;
    double s_calib = 0.0;
    double w_calib = 0.0;
    double delta_calib = 0.0;
    double w_exp = 0.0;
    std::int64_t m_pred = 0;
    std::uint64_t n_remaining = 0;
    std::vector<CalibrationRow> rows;
};

struct CalibrationOptions {
    double gamma_calib = 0.22;
    double eps_calib = 1e-10;
    double eps_c = 1e-10, eps_s = 1e-10;
    unsigned workers = 1;
};

// Chronological prefix of the schedule as calibration data; throws NoViolation
// when no bin width predicts a positive output.
CalibrationResult calibrate(const EventStream& stream, const SettingsSchedule& schedule,
                            const std::vector<double>& tau_grid, const CalibrationOptions& opt);

// The remainder of the schedule after the calibration prefix.
SettingsSchedule remainder_schedule(const SettingsSchedule& schedule, std::int64_t split_ns);

// ---- full pipeline ----

struct EndToEndConfig {
    SimulationConfig sim;
    std::vector<double> tau_grid;
    CalibrationOptions calib;
    std::uint64_t seed_bits_seed = 1;  // uniform seed for the extractor
    BatteryOptions battery;
};

struct EndToEndReport {
    CalibrationResult calib;
    ChshEstimate remainder;
    ProtocolRun run;
    std::vector<TestReport> stats;  // empty when too few bits
    std::uint64_t events = 0;
};

// Calibrate on the prefix, bin the remainder at tau*, test, extract with seed
// bits from `seed`, then run the battery when the output is long enough.
EndToEndReport analyze_recorded(const EventStream& stream, const SettingsSchedule& schedule,
                                const std::vector<double>& tau_grid, const CalibrationOptions& calib,
                                BitSource& seed, const BatteryOptions& battery = {});

// simulate followed by analyze_recorded
EndToEndReport end_to_end(const EndToEndConfig& cfg);

}  // namespace cwbell
