#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "cwbell/binning.hpp"
#include "cwbell/errors.hpp"
#include "cwbell/event_simulator.hpp"
#include "cwbell/extractor.hpp"
#include "cwbell/io.hpp"
#include "cwbell/physics_model.hpp"
#include "cwbell/protocol.hpp"
#include "cwbell/rates.hpp"
#include "cwbell/stat_tests.hpp"

using namespace cwbell;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;
constexpr int kExitNoViolation = 4;

constexpr double kDeg = std::numbers::pi / 180.0;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- option helpers: every option carries a printable default so that the
// manifest can echo it ----

CLI::Option* num(CLI::App* app, const std::string& name, double& v, const std::string& desc) {
    return app->add_option("--" + name, v, desc)->default_str(fmt(v));
}

template <class I>
CLI::Option* integer(CLI::App* app, const std::string& name, I& v, const std::string& desc) {
    return app->add_option("--" + name, v, desc)->default_str(std::to_string(v));
}

CLI::Option* text(CLI::App* app, const std::string& name, std::string& v, const std::string& desc) {
    return app->add_option("--" + name, v, desc)->default_str(v);
}

CLI::Option* list(CLI::App* app, const std::string& name, std::vector<double>& v,
                  const std::string& desc) {
    std::string d;
    for (double x : v) d += (d.empty() ? "" : ",") + fmt(x);
    return app->add_option("--" + name, v, desc)->delimiter(',')->default_str(d);
}

struct ModelOptions {
    double theta = 25.9, phi = 0.0;
    double alpha0 = -7.2, alpha1 = 28.7, beta0 = 82.7, beta1 = -61.5;
    double eta_a = 0.824, eta_b = 0.822;
    double dark_a = 45.7, dark_b = 41.5;
    double pair_rate = 2.4e4;

    void add(CLI::App* app, bool angles = true) {
        if (angles) {
            num(app, "theta-deg", theta, "state angle theta (degrees)");
            num(app, "phi-deg", phi, "state phase phi (degrees)");
            num(app, "alpha0-deg", alpha0, "Alice analyzer angle, x=0 (degrees)");
            num(app, "alpha1-deg", alpha1, "Alice analyzer angle, x=1 (degrees)");
            num(app, "beta0-deg", beta0, "Bob analyzer angle, y=0 (degrees)");
            num(app, "beta1-deg", beta1, "Bob analyzer angle, y=1 (degrees)");
        }
        num(app, "eta-a", eta_a, "Alice detection efficiency");
        num(app, "eta-b", eta_b, "Bob detection efficiency");
        num(app, "dark-a", dark_a, "Alice background rate (1/s)");
        num(app, "dark-b", dark_b, "Bob background rate (1/s)");
        num(app, "pair-rate", pair_rate, "pair emission rate (1/s)");
    }

    SourceModel model() const {
        SourceModel m;
        m.theta = theta * kDeg;
        m.phi = phi * kDeg;
        m.alpha0 = alpha0 * kDeg;
        m.alpha1 = alpha1 * kDeg;
        m.beta0 = beta0 * kDeg;
        m.beta1 = beta1 * kDeg;
        m.eta_a = eta_a;
        m.eta_b = eta_b;
        m.dark_rate_a = dark_a;
        m.dark_rate_b = dark_b;
        m.pair_rate = pair_rate;
        m.validate();
        return m;
    }
};

// ---- run context shared by all subcommands ----

struct Run {
    CLI::App* sub = nullptr;
    unsigned workers = 1;
    std::string config;
    std::string manifest_path;
    std::string out;
    Manifest manifest;
    std::vector<std::string> inputs;  // option names holding input file paths

    void begin() {
        manifest.set("cwbell.manifest", "1");
        manifest.set("cwbell.events_format", "cwbell-events v1");
        manifest.set("cwbell.bits_format", "raw msb-first v1");
        manifest.set("command", sub->get_name());
        for (const CLI::Option* opt : sub->get_options()) {
            if (opt->get_lnames().empty()) continue;
            const std::string& name = opt->get_lnames().front();
            if (name == "help" || name == "config" || name == "manifest") continue;
            std::string v;
            if (opt->count() > 0) {
                for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
            } else {
                v = opt->get_default_str();
            }
            manifest.set(name, v);
        }
        for (const auto& name : inputs) {
            const std::string* path = manifest.get(name);
            if (path && !path->empty()) manifest.set("input.sha256." + name, sha256_file(*path));
        }
    }

    void output_file(const std::string& key, const std::string& path) {
        manifest.set("output." + key + ".sha256", sha256_file(path));
    }

    void result(const std::string& key, const std::string& v) { manifest.set("result." + key, v); }
    void result(const std::string& key, double v) { manifest.set("result." + key, v); }
    void result(const std::string& key, std::int64_t v) { manifest.set("result." + key, v); }
    void result(const std::string& key, std::uint64_t v) { manifest.set("result." + key, v); }

    void finish() {
        std::string path = manifest_path;
        if (path.empty()) path = out.empty() ? "cwbell-" + sub->get_name() + ".manifest" : out + ".manifest";
        manifest.write(path);
    }
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    f << body;
}

double parse_number_or(const std::string& s, const char* word, double fallback, const std::string& opt) {
    if (s == word) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("--" + opt + ": expected a number or '" + word + "', got '" + s + "'");
}

// ---- subcommands ----

struct SimulateCmd {
    ModelOptions model;
    double duration = 1.0, segment = 0.1, jitter_ns = 170.0, quantization_ns = 2.0;
    std::uint64_t seed = 1;
    std::string schedule, schedule_out;

    void add(CLI::App* app) {
        model.add(app);
        num(app, "duration", duration, "simulated time (s)");
        num(app, "segment", segment, "setting segment length (s) when no schedule is given");
        num(app, "jitter-ns", jitter_ns, "Gaussian timing jitter standard deviation (ns)");
        num(app, "quantization-ns", quantization_ns, "time-tag resolution (ns)");
        integer(app, "seed", seed, "random seed");
        text(app, "schedule", schedule, "input settings schedule (default: generated)");
        text(app, "schedule-out", schedule_out, "where to write the schedule (default: <out>.schedule)");
    }

    int exec(Run& run) {
        require(!run.out.empty(), "--out is required");
        SimulationConfig sc;
        sc.model = model.model();
        sc.duration = duration;
        sc.jitter_sigma = jitter_ns * 1e-9;
        sc.quantization = quantization_ns * 1e-9;
        sc.rng_seed = seed;
        const auto dur_ns = static_cast<std::int64_t>(std::llround(duration * 1e9));
        if (!schedule.empty()) {
            sc.schedule = read_schedule(schedule);
        } else {
            require(segment > 0.0, "--segment must be positive");
            sc.schedule = make_schedule(dur_ns, static_cast<std::int64_t>(std::llround(segment * 1e9)), seed);
        }
        const auto stream = simulate(sc);
        write_events(run.out, stream);
        const std::string sched = schedule_out.empty() ? run.out + ".schedule" : schedule_out;
        write_schedule(sched, sc.schedule);
        run.output_file("events", run.out);
        run.output_file("schedule", sched);
        std::uint64_t na = 0;
        for (const auto& e : stream.events) na += e.channel == Channel::A;
        run.result("events", static_cast<std::uint64_t>(stream.events.size()));
        run.result("events_a", na);
        run.result("events_b", static_cast<std::uint64_t>(stream.events.size()) - na);
        run.result("segments", static_cast<std::uint64_t>(sc.schedule.segments.size()));
        std::cout << "events " << stream.events.size() << " (A " << na << ", B "
                  << stream.events.size() - na << ") written to " << run.out << "\n";
        return kExitOk;
    }
};

struct ScanTauCmd {
    ModelOptions model;
    std::string events, schedule;
    std::vector<double> tau_us{0.2, 0.5, 1, 2, 3, 5, 8, 8.9, 10, 12, 14, 17, 20, 25, 30, 40};
    int with_model = 0;

    void add(CLI::App* app) {
        text(app, "events", events, "event file")->required();
        text(app, "schedule", schedule, "settings schedule file")->required();
        list(app, "tau-us", tau_us, "comma-separated bin widths (us)");
        integer(app, "with-model", with_model, "1: add the analytic S(tau) column from the model options");
        model.add(app);
    }

    int exec(Run& run) {
        const auto stream = read_events(events);
        const auto sched = read_schedule(schedule);
        std::vector<double> taus;
        for (double t : tau_us) taus.push_back(t * 1e-6);
        const auto rows = scan_tau(stream, sched, taus, run.workers);
        const SourceModel m = with_model ? model.model() : SourceModel{};
        std::string table = with_model ? "tau_us rounds S sigma_S S_model\n" : "tau_us rounds S sigma_S\n";
        std::size_t best = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            table += fmt(static_cast<double>(r.tau_ns) * 1e-3) + " " + std::to_string(r.est.rounds()) + " " +
                     fmt(r.est.s) + " " + fmt(r.est.sigma_s);
            if (with_model) table += " " + fmt(chsh_at_tau(m, r.tau));
            table += "\n";
            if (r.est.s > rows[best].est.s) best = i;
        }
        std::cout << table;
        if (!run.out.empty()) {
            write_text(run.out, table);
            run.output_file("table", run.out);
        }
        run.result("best_tau_us", static_cast<double>(rows[best].tau_ns) * 1e-3);
        run.result("best_s", rows[best].est.s);
        run.result("best_sigma_s", rows[best].est.sigma_s);
        return kExitOk;
    }
};

struct OptimizeCmd {
    ModelOptions model;
    double tau_us = 13.4;
    int starts = 32, single_pair = 0;

    void add(CLI::App* app) {
        model.add(app, false);
        num(app, "tau-us", tau_us, "bin width (us); mu = pair-rate * tau");
        integer(app, "starts", starts, "multistart count");
        integer(app, "single-pair", single_pair, "1: maximize the single-pair CHSH value instead");
    }

    int exec(Run& run) {
        OptimizeOptions opt;
        opt.starts = starts;
        opt.workers = run.workers;
        opt.single_pair = single_pair != 0;
        const SourceModel base = model.model();
        const double tau = tau_us * 1e-6;
        const auto r = optimize_parameters(base, base.pair_rate * tau, tau, opt);
        Manifest out;
        out.set("theta_deg", r.model.theta / kDeg);
        out.set("alpha0_deg", r.model.alpha0 / kDeg);
        out.set("alpha1_deg", r.model.alpha1 / kDeg);
        out.set("beta0_deg", r.model.beta0 / kDeg);
        out.set("beta1_deg", r.model.beta1 / kDeg);
        out.set("s", r.s);
        out.set("mu", base.pair_rate * tau);
        out.set("converged", r.converged ? "1" : "0");
        out.set("flat", r.flat ? "1" : "0");
        for (const auto& [k, v] : out.entries()) run.result(k, v);
        std::cout << out.text();
        if (!run.out.empty()) {
            out.write(run.out);
            run.output_file("result", run.out);
        }
        return kExitOk;
    }
};

struct RatesCmd {
    ModelOptions model;
    std::string s = "model", n = "inf";
    double tau_us = 8.9, gamma = 1.0, eps_c = 1e-10, eps_s = 1e-10;

    void add(CLI::App* app) {
        text(app, "s", s, "CHSH value, or 'model' to evaluate the model at tau");
        num(app, "tau-us", tau_us, "bin width (us)");
        text(app, "n", n, "number of rounds, or 'inf'");
        num(app, "gamma", gamma, "test-round probability");
        num(app, "eps-c", eps_c, "completeness error");
        num(app, "eps-s", eps_s, "soundness error");
        model.add(app);
    }

    int exec(Run& run) {
        const double tau = tau_us * 1e-6;
        const double sv = s == "model" ? chsh_at_tau(model.model(), tau) : parse_number_or(s, "model", 0, "s");
        const double nv = parse_number_or(n, "inf", std::numeric_limits<double>::infinity(), "n");
        const auto r = compute_rates(sv, tau, nv, gamma, eps_c, eps_s);
        Manifest out;
        out.set("s", r.s);
        out.set("r_inf", r.r_inf);
        out.set("r_inf_net", r.r_inf_net);
        out.set("r_n", r.r_n);
        out.set("r_net", r.r_net);
        out.set("eta_opt", r.eta_opt_value);
        out.set("p_t", r.p_t_star);
        out.set("m", r.m);
        out.set("ell", r.ell);
        out.set("a", r.a);
        out.set("d", r.d);
        out.set("delta_est", r.budget.delta_est);
        out.set("eps_sa", r.budget.eps_sa);
        out.set("eps_ea", r.budget.eps_ea);
        out.set("eps_prime", r.budget.eps_prime);
        out.set("eps_ex", r.budget.eps_ex);
        out.set("eps_1", r.budget.eps_1);
        for (const auto& [k, v] : out.entries()) run.result(k, v);
        std::cout << out.text();
        if (!run.out.empty()) {
            out.write(run.out);
            run.output_file("result", run.out);
        }
        return kExitOk;
    }
};

struct ProtocolCmd {
    ModelOptions model;
    std::string mode = "recorded", events, schedule, seed_file, omega_exp = "model";
    std::vector<double> tau_us{5, 6, 7, 8, 8.9, 10, 11, 12, 14, 16, 20};
    double gamma_calib = 0.22, eps_calib = 1e-10, eps_c = 1e-10, eps_s = 1e-10, gamma = 1.0;
    double alpha = 0.01;
    std::uint64_t seed = 1, n = 1000000;
    std::size_t sequences = 97, sequence_len = 0;
    std::string stats_out;

    void add(CLI::App* app) {
        text(app, "mode", mode, "recorded: calibrate and certify an event file; live: play rounds against the model")
            ->check(CLI::IsMember({"recorded", "live"}));
        text(app, "events", events, "event file (recorded mode)");
        text(app, "schedule", schedule, "settings schedule (recorded mode)");
        list(app, "tau-us", tau_us, "bin-width grid for calibration (us); live mode uses the first entry");
        num(app, "gamma-calib", gamma_calib, "calibration fraction");
        num(app, "eps-calib", eps_calib, "calibration confidence");
        num(app, "eps-c", eps_c, "completeness error");
        num(app, "eps-s", eps_s, "soundness error");
        text(app, "seed-file", seed_file, "uniform bits for the protocol (default: generated from --seed)");
        integer(app, "seed", seed, "seed of the generated uniform bits");
        integer(app, "n", n, "rounds (live mode)");
        num(app, "gamma", gamma, "test-round probability (live mode)");
        text(app, "omega-exp", omega_exp, "expected winning probability (live mode), or 'model'");
        integer(app, "sequences", sequences, "battery subsequences");
        integer(app, "sequence-len", sequence_len, "battery subsequence length (0: split evenly)");
        num(app, "alpha", alpha, "battery significance level");
        text(app, "stats-out", stats_out, "where to write the battery table");
        model.add(app);
    }

    void report_run(Run& run, const ProtocolRun& pr) {
        run.result("status", pr.status == RunStatus::passed ? "passed" : "aborted");
        if (!pr.abort_reason.empty()) run.result("abort_reason", pr.abort_reason);
        run.result("n", pr.n);
        run.result("test_rounds", pr.test_rounds);
        run.result("score", pr.score);
        run.result("threshold", pr.threshold);
        run.result("omega_exp", pr.params.omega_exp);
        run.result("delta_est", pr.params.delta_est);
        run.result("m", pr.m);
        run.result("ell", static_cast<std::int64_t>(pr.spec.ell));
        run.result("d", pr.spec.d);
        run.result("design_d", pr.spec.design_d);
        run.result("eps_1", pr.spec.eps_1);
        run.result("bits_consumed", pr.bits_consumed());
        run.result("output_bits", static_cast<std::uint64_t>(pr.output.size()));
        std::cout << "rounds " << pr.n << ", score " << pr.score << ", threshold " << fmt(pr.threshold) << ": "
                  << (pr.status == RunStatus::passed ? "passed" : "ABORTED (" + pr.abort_reason + ")") << "\n";
    }

    void write_output(Run& run, const ProtocolRun& pr, const std::vector<TestReport>& stats) {
        if (pr.status != RunStatus::passed) return;
        write_bits(run.out, pr.output);
        run.output_file("bits", run.out);
        std::cout << pr.output.size() << " bits written to " << run.out << "\n";
        if (!stats.empty()) {
            const std::string table = format_battery(stats);
            std::cout << table;
            if (!stats_out.empty()) {
                write_text(stats_out, table);
                run.output_file("stats", stats_out);
            }
            for (const auto& t : stats) {
                std::string key = t.name;
                for (char& c : key) c = c == ' ' ? '_' : static_cast<char>(std::tolower(c));
                run.result("stats." + key, t.proportion_text());
            }
        }
    }

    int exec(Run& run) {
        require(!run.out.empty(), "--out is required");
        std::unique_ptr<BitSource> src;
        if (!seed_file.empty())
            src = std::make_unique<BitStringSource>(read_bits(seed_file));
        else
            src = std::make_unique<RngBitSource>(seed);
        BatteryOptions bo;
        bo.sequences = sequences;
        bo.sequence_len = sequence_len;
        bo.alpha = alpha;

        if (mode == "live") {
            require(!tau_us.empty(), "--tau-us is empty");
            const double tau = tau_us.front() * 1e-6;
            ModelDevice dev(model.model(), tau, seed);
            const double w = omega_exp == "model" ? winning_probability(dev.expected_s())
                                                  : parse_number_or(omega_exp, "model", 0, "omega-exp");
            ProtocolConfig pc = preregister(w, tau, n, gamma, eps_c, eps_s);
            pc.keep_rounds = false;
            pc.workers = run.workers;
            const auto pr = run_protocol(dev, pc, *src);
            report_run(run, pr);
            std::vector<TestReport> stats;
            bo.workers = run.workers;
            const std::size_t len = bo.sequence_len ? bo.sequence_len : pr.output.size() / bo.sequences;
            if (len >= 100 && len * bo.sequences <= pr.output.size()) {
                bo.sequence_len = len;
                stats = run_battery(pr.output, bo);
            }
            write_output(run, pr, stats);
            return pr.status == RunStatus::passed ? kExitOk : kExitAbort;
        }

        require(!events.empty() && !schedule.empty(), "recorded mode needs --events and --schedule");
        const auto stream = read_events(events);
        const auto sched = read_schedule(schedule);
        std::vector<double> taus;
        for (double t : tau_us) taus.push_back(t * 1e-6);
        CalibrationOptions co;
        co.gamma_calib = gamma_calib;
        co.eps_calib = eps_calib;
        co.eps_c = eps_c;
        co.eps_s = eps_s;
        co.workers = run.workers;
        const auto rep = analyze_recorded(stream, sched, taus, co, *src, bo);
        run.result("tau_star_us", static_cast<double>(rep.calib.tau_star_ns) * 1e-3);
        run.result("s_calib", rep.calib.s_calib);
        run.result("w_calib", rep.calib.w_calib);
        run.result("delta_calib", rep.calib.delta_calib);
        run.result("m_pred", rep.calib.m_pred);
        run.result("s_remainder", rep.remainder.s);
        run.result("sigma_s_remainder", rep.remainder.sigma_s);
        std::cout << "calibration: tau* = " << fmt(static_cast<double>(rep.calib.tau_star_ns) * 1e-3)
                  << " us, S = " << fmt(rep.calib.s_calib) << ", predicted m = " << rep.calib.m_pred << "\n"
                  << "remainder: S = " << fmt(rep.remainder.s) << " +- " << fmt(rep.remainder.sigma_s) << "\n";
        report_run(run, rep.run);
        write_output(run, rep.run, rep.stats);
        return rep.run.status == RunStatus::passed ? kExitOk : kExitAbort;
    }
};

struct ExtractCmd {
    std::string source, seed_file;
    std::uint64_t source_bits = 0, m = 0;
    int ell = 0;
    double eps1 = 1e-12;

    void add(CLI::App* app) {
        text(app, "source", source, "weak source bit file")->required();
        integer(app, "source-bits", source_bits, "source length in bits (0: whole file)");
        text(app, "seed-file", seed_file, "uniform seed bit file")->required();
        integer(app, "m", m, "output length")->required();
        integer(app, "ell", ell, "field degree (0: from --eps1 and the source length)");
        num(app, "eps1", eps1, "per-bit extractor error used when --ell is 0");
    }

    int exec(Run& run) {
        require(!run.out.empty(), "--out is required");
        const auto src = read_bits(source, source_bits);
        require(src.size() % 2 == 0 || ell > 0, "--ell is required for an odd source length");
        const auto spec = ell > 0 ? ExtractorSpec::with_ell(src.size(), m, ell)
                                  : ExtractorSpec::from_budget(src.size() / 2, m, eps1);
        const auto seed = read_bits(seed_file);
        const auto out = trevisan_extract(src, seed.slice(0, std::min<std::size_t>(seed.size(), spec.design_d)), spec,
                                          ExtractOptions{run.workers});
        write_bits(run.out, out);
        run.output_file("bits", run.out);
        run.result("input_bits", static_cast<std::uint64_t>(src.size()));
        run.result("output_bits", static_cast<std::uint64_t>(out.size()));
        run.result("ell", static_cast<std::int64_t>(spec.ell));
        run.result("design_d", spec.design_d);
        std::cout << out.size() << " bits written to " << run.out << " (ell " << spec.ell << ", seed bits "
                  << spec.design_d << ")\n";
        return kExitOk;
    }
};

struct StatTestsCmd {
    std::string bits;
    std::uint64_t length = 0;
    std::size_t sequences = 97, sequence_len = 0;
    double alpha = 0.01;

    void add(CLI::App* app) {
        text(app, "bits", bits, "bit file")->required();
        integer(app, "length", length, "bits to read (0: whole file)");
        integer(app, "sequences", sequences, "number of subsequences");
        integer(app, "sequence-len", sequence_len, "subsequence length (0: split evenly)");
        num(app, "alpha", alpha, "significance level");
    }

    int exec(Run& run) {
        const auto b = read_bits(bits, length);
        BatteryOptions bo;
        bo.sequences = sequences;
        bo.sequence_len = sequence_len;
        bo.alpha = alpha;
        bo.workers = run.workers;
        const auto reports = run_battery(b, bo);
        const std::string table = format_battery(reports);
        std::cout << table;
        if (!run.out.empty()) {
            write_text(run.out, table);
            run.output_file("table", run.out);
        }
        for (const auto& t : reports) {
            std::string key = t.name;
            for (char& c : key) c = c == ' ' ? '_' : static_cast<char>(std::tolower(c));
            run.result(key + ".proportion", t.proportion_text());
            run.result(key + ".uniformity_p", t.uniformity_p);
        }
        return kExitOk;
    }
};

// Config values fill in options not given on the command line. result.*,
// input.*, output.* and cwbell.* keys are bookkeeping and skipped.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
    std::size_t sub_pos = args.size();
    for (std::size_t i = 1; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-' && app.get_subcommand_no_throw(args[i]) != nullptr) {
            sub_pos = i;
            break;
        }
    if (sub_pos == args.size()) return args;
    std::string config;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
    }
    if (config.empty()) return args;

    const CLI::App* sub = app.get_subcommand_no_throw(args[sub_pos]);
    const Manifest cfg = Manifest::read(config);
    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i)
        if (args[i].rfind("--", 0) == 0) given.insert(args[i].substr(2, args[i].find('=') - 2));

    for (const auto& [key, value] : cfg.entries()) {
        if (key.rfind("result.", 0) == 0 || key.rfind("input.", 0) == 0 || key.rfind("output.", 0) == 0 ||
            key.rfind("cwbell.", 0) == 0)
            continue;
        if (key == "command") {
            if (value != sub->get_name())
                throw UsageError(config + " is a manifest for '" + value + "', not '" + sub->get_name() + "'");
            continue;
        }
        if (key == "config" || key == "help" || sub->get_option_no_throw("--" + key) == nullptr)
            throw UsageError(config + ": unknown key '" + key + "' for " + sub->get_name());
        if (given.count(key) || value.empty()) continue;
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-test randomness generation: simulation, analysis, certification and extraction"};
    app.require_subcommand(1);
    unsigned workers = 1;
    app.add_option("--workers", workers, "worker threads; results do not depend on it")
        ->check(CLI::Range(1u, 1024u));

    Run run;
    SimulateCmd simulate_cmd;
    ScanTauCmd scan_cmd;
    OptimizeCmd optimize_cmd;
    RatesCmd rates_cmd;
    ProtocolCmd protocol_cmd;
    ExtractCmd extract_cmd;
    StatTestsCmd stat_cmd;
    std::vector<std::pair<CLI::App*, std::function<int(Run&)>>> cmds;

    std::vector<std::vector<std::string>> inputs_of;  // options naming input files, hashed into the manifest
    auto reg = [&](const char* name, const char* desc, auto& cmd, std::vector<std::string> inputs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", run.config, "manifest or key=value file supplying defaults");
        sub->add_option("--out", run.out, "primary output file");
        sub->add_option("--manifest", run.manifest_path, "manifest path (default: <out>.manifest)");
        cmd.add(sub);
        inputs_of.push_back(std::move(inputs));
        cmds.emplace_back(sub, [&cmd](Run& r) { return cmd.exec(r); });
    };
    reg("simulate", "simulate a detection event stream", simulate_cmd, {"schedule"});
    reg("scan-tau", "CHSH value of an event stream against bin width", scan_cmd, {"events", "schedule"});
    reg("optimize", "state and analyzer angles maximizing S at a given bin width", optimize_cmd, {});
    reg("rates", "asymptotic and finite-size rates for a CHSH value", rates_cmd, {});
    reg("protocol", "calibrate, test and extract (recorded or live rounds)", protocol_cmd, {"events", "schedule", "seed-file"});
    reg("extract", "Trevisan extraction of a bit file", extract_cmd, {"source", "seed-file"});
    reg("stattests", "frequency, block frequency, runs and cumulative sums battery", stat_cmd, {"bits"});

    try {
        const auto args = merge_config(app, std::vector<std::string>(argv, argv + argc));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        for (std::size_t i = 0; i < cmds.size(); ++i) {
            if (!cmds[i].first->parsed()) continue;
            run.sub = cmds[i].first;
            run.workers = workers;
            run.inputs = inputs_of[i];
            run.begin();
            const int rc = cmds[i].second(run);
            run.finish();
            return rc;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NoViolation& e) {
        std::cerr << "no violation: " << e.what() << "\n";
        if (run.sub) {
            run.result("status", "no_violation");
            run.finish();
        }
        return kExitNoViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
