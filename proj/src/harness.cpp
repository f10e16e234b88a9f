#include "pacesd/harness.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace pacesd {

std::string detector_name(Detector d) {
    switch (d) {
        case Detector::pacesd: return "pacesd";
        case Detector::mmse: return "mmse";
        case Detector::uamp_csi: return "uamp_csi";
        case Detector::oracle_ch: return "oracle_ch";
        case Detector::sbl_known_x: return "sbl_known_x";
    }
    return "?";
}

namespace {

constexpr Detector kDetectorOrder[] = {Detector::pacesd, Detector::mmse, Detector::uamp_csi,
                                       Detector::oracle_ch, Detector::sbl_known_x};

Detector detector_by_name(const std::string& name) {
    for (Detector d : kDetectorOrder) {
        if (detector_name(d) == name) {
            return d;
        }
    }
    throw ConfigError("unknown detector: " + name);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + value);
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + value);
    }
}

// pilot_fraction accepts "1/16" as well as plain decimals.
double parse_fraction(const std::string& key, const std::string& value) {
    const auto slash = value.find('/');
    if (slash == std::string::npos) {
        return parse_real(key, value);
    }
    const double num = parse_real(key, trim(value.substr(0, slash)));
    const double den = parse_real(key, trim(value.substr(slash + 1)));
    if (den == 0.0) {
        throw ConfigError("config key '" + key + "': zero denominator");
    }
    return num / den;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError("config key '" + key + "': not a boolean: " + value);
}

// Shortest round-trip decimal form; NaN prints as "nan" for
// not-applicable metrics.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed_for(std::uint64_t base_seed, double snr_db, int trial_index) {
    const std::uint64_t snr_bits = std::bit_cast<std::uint64_t>(snr_db);
    return mix64(mix64(mix64(base_seed) ^ snr_bits) ^ static_cast<std::uint64_t>(trial_index));
}

}  // namespace

std::vector<Complex> alphabet_by_name(const std::string& name) {
    if (name == "bpsk") {
        return bpsk_alphabet();
    }
    if (name == "qpsk") {
        return qpsk_alphabet();
    }
    throw ConfigError("unknown modulation: " + name + " (expected bpsk or qpsk)");
}

void ExperimentConfig::validate() const {
    try {
        frame.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("frame: ") + e.what());
    }
    if (K < 1 || static_cast<int>(paths_per_vehicle.size()) != K) {
        throw ConfigError("scenario.paths_per_vehicle must list one entry per vehicle");
    }
    if (trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
    if (snr_grid_db.empty()) {
        throw ConfigError("snr_grid_db must be nonempty");
    }
    if (!(pilot_fraction > 0.0 && pilot_fraction < 1.0)) {
        throw ConfigError("pilot_fraction must be in (0, 1)");
    }
    if (detectors.empty()) {
        throw ConfigError("detectors must name at least one detector");
    }
    if (solver.max_iters < 1 || !(solver.rel_tol > 0.0)) {
        throw ConfigError("solver.max_iters must be >= 1 and solver.rel_tol positive");
    }
    if (!(solver.damping > 0.0 && solver.damping <= 1.0)) {
        throw ConfigError("solver.damping must be in (0, 1]");
    }
    if (!(solver.assoc_threshold > 0.0 && solver.assoc_threshold < 1.0)) {
        throw ConfigError("solver.assoc_threshold must be in (0, 1)");
    }
}

ExperimentConfig parse_config_text(std::istream& in) {
    ExperimentConfig cfg;
    cfg.frame.alphabet = alphabet_by_name(cfg.modulation);

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "frame.M") {
            cfg.frame.M = static_cast<int>(parse_int(key, value));
        } else if (key == "frame.N") {
            cfg.frame.N = static_cast<int>(parse_int(key, value));
        } else if (key == "frame.delta_f") {
            cfg.frame.delta_f = parse_real(key, value);
        } else if (key == "frame.f_c") {
            cfg.frame.f_c = parse_real(key, value);
        } else if (key == "frame.modulation") {
            cfg.modulation = value;
            cfg.frame.alphabet = alphabet_by_name(value);
        } else if (key == "frame.pulse") {
            if (value != "rect") {
                throw ConfigError("frame.pulse: only the rectangular pulse is supported");
            }
        } else if (key == "scenario.K") {
            cfg.K = static_cast<int>(parse_int(key, value));
            if (cfg.K >= 1 && static_cast<int>(cfg.paths_per_vehicle.size()) != cfg.K) {
                cfg.paths_per_vehicle.assign(cfg.K, cfg.paths_per_vehicle.front());
            }
        } else if (key == "scenario.paths_per_vehicle") {
            cfg.paths_per_vehicle.clear();
            for (const std::string& item : split(value, ',')) {
                cfg.paths_per_vehicle.push_back(static_cast<int>(parse_int(key, item)));
            }
            if (cfg.paths_per_vehicle.size() == 1 && cfg.K > 1) {
                cfg.paths_per_vehicle.assign(cfg.K, cfg.paths_per_vehicle.front());
            }
        } else if (key == "scenario.l_max") {
            cfg.l_max = static_cast<int>(parse_int(key, value));
        } else if (key == "scenario.k_max") {
            cfg.k_max = static_cast<int>(parse_int(key, value));
        } else if (key == "scenario.n_bs") {
            cfg.n_bs = static_cast<int>(parse_int(key, value));
        } else if (key == "pilot_fraction") {
            cfg.pilot_fraction = parse_fraction(key, value);
        } else if (key == "snr_grid_db") {
            cfg.snr_grid_db.clear();
            for (const std::string& item : split(value, ',')) {
                cfg.snr_grid_db.push_back(parse_real(key, item));
            }
        } else if (key == "trials") {
            cfg.trials = static_cast<int>(parse_int(key, value));
        } else if (key == "base_seed") {
            cfg.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "solver.max_iters") {
            cfg.solver.max_iters = static_cast<int>(parse_int(key, value));
        } else if (key == "solver.rel_tol") {
            cfg.solver.rel_tol = parse_real(key, value);
        } else if (key == "solver.eta") {
            cfg.solver.eta = parse_real(key, value);
        } else if (key == "solver.epsilon_init") {
            cfg.solver.epsilon_init = parse_real(key, value);
        } else if (key == "solver.gamma_init") {
            cfg.solver.gamma_init = parse_real(key, value);
        } else if (key == "solver.beta_init") {
            cfg.solver.beta_init = parse_real(key, value);
        } else if (key == "solver.damping") {
            cfg.solver.damping = parse_real(key, value);
        } else if (key == "solver.assoc_threshold") {
            cfg.solver.assoc_threshold = parse_real(key, value);
        } else if (key == "detectors") {
            cfg.detectors.clear();
            for (const std::string& item : split(value, ',')) {
                cfg.detectors.insert(detector_by_name(item));
            }
        } else if (key == "deterministic_output") {
            cfg.deterministic_output = parse_bool(key, value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    return parse_config_text(in);
}

std::vector<int> gray_bits(int symbol_index, int alphabet_size) {
    if (alphabet_size < 2 || (alphabet_size & (alphabet_size - 1)) != 0) {
        throw ConfigError("gray_bits: alphabet size must be a power of two");
    }
    int bits = 0;
    while ((1 << bits) < alphabet_size) {
        ++bits;
    }
    const int g = symbol_index ^ (symbol_index >> 1);
    std::vector<int> out(bits);
    for (int b = 0; b < bits; ++b) {
        out[b] = (g >> (bits - 1 - b)) & 1;
    }
    return out;
}

std::pair<long, long> count_bit_errors(const CVec& tx, const CVec& rx,
                                       const std::vector<bool>& pilot_mask,
                                       const std::vector<Complex>& alphabet) {
    const int size = static_cast<int>(alphabet.size());
    if (size < 2 || (size & (size - 1)) != 0) {
        throw ConfigError("count_bit_errors: alphabet size must be a power of two");
    }
    long errors = 0;
    long total = 0;
    int bits = 0;
    while ((1 << bits) < size) {
        ++bits;
    }
    for (int i = 0; i < tx.size(); ++i) {
        if (pilot_mask[i]) {
            continue;
        }
        const int a = hard_decision_index(tx[i], alphabet);
        const int b = hard_decision_index(rx[i], alphabet);
        const int ga = a ^ (a >> 1);
        const int gb = b ^ (b >> 1);
        errors += std::popcount(static_cast<unsigned>(ga ^ gb));
        total += bits;
    }
    return {errors, total};
}

int hit_flag(const std::vector<int>& support, const std::vector<int>& truth) {
    for (int id : truth) {
        if (std::find(support.begin(), support.end(), id) == support.end()) {
            return 0;
        }
    }
    return 1;
}

int false_alarm_flag(const std::vector<int>& support, const std::vector<int>& truth,
                     int total_candidates) {
    for (int id : support) {
        if (id < 1 || id > total_candidates) {
            return 1;
        }
        if (std::find(truth.begin(), truth.end(), id) == truth.end()) {
            return 1;
        }
    }
    return 0;
}

DdFrame random_frame(const FrameConfig& cfg, double pilot_fraction, std::uint64_t seed) {
    const int n = cfg.grid_size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> sym(0, static_cast<int>(cfg.alphabet.size()) - 1);

    DdFrame frame;
    frame.symbols.resize(n);
    frame.pilot_mask.assign(n, false);
    frame.pilot_values = CVec::Zero(n);
    for (int i = 0; i < n; ++i) {
        frame.symbols[i] = cfg.alphabet[sym(rng)];
    }
    const int n_pilots = std::max(1, static_cast<int>(std::llround(pilot_fraction * n)));
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
        idx[i] = i;
    }
    for (int p = 0; p < n_pilots; ++p) {
        std::uniform_int_distribution<int> pick(p, n - 1);
        std::swap(idx[p], idx[pick(rng)]);
        frame.pilot_mask[idx[p]] = true;
        frame.pilot_values[idx[p]] = frame.symbols[idx[p]];
    }
    return frame;
}

namespace {

double nmse_over_active(const CVec& h_hat_pool, const CVec& h_true,
                        const std::vector<int>& active_ids) {
    double num = 0.0;
    double den = 0.0;
    for (int id : active_ids) {
        num += std::norm(h_hat_pool[id - 1] - h_true[id - 1]);
        den += std::norm(h_true[id - 1]);
    }
    return num / den;
}

}  // namespace

std::vector<TrialMetrics> run_trial(const ExperimentConfig& cfg, double snr_db,
                                    int trial_index) {
    constexpr int kTxVehicle = 1;
    const std::uint64_t seed = trial_seed_for(cfg.base_seed, snr_db, trial_index);
    std::mt19937_64 master(seed);
    const std::uint64_t scenario_seed = master();
    const std::uint64_t frame_seed = master();
    const std::uint64_t noise_seed = master();

    const Scenario scenario = generate_scenario(cfg.K, cfg.paths_per_vehicle, cfg.l_max,
                                                cfg.k_max, cfg.n_bs, cfg.frame, scenario_seed);
    const DdFrame frame = random_frame(cfg.frame, cfg.pilot_fraction, frame_seed);
    const Observation obs = synthesize_uplink(scenario, kTxVehicle, frame, snr_db, noise_seed);

    const CVec h_true = scenario.true_gain_vector(kTxVehicle);
    const std::vector<int> truth_ids = scenario.active_candidates(kTxVehicle);

    // Shared inputs, built once per trial.
    Dictionary dict;
    bool have_dict = false;
    const bool need_dict = cfg.detectors.count(Detector::pacesd) ||
                           cfg.detectors.count(Detector::sbl_known_x);
    if (need_dict) {
        dict = assemble_dictionary(scenario.candidates, cfg.frame);
        have_dict = true;
    }
    EffectiveChannel eff;
    if (cfg.detectors.count(Detector::mmse) || cfg.detectors.count(Detector::uamp_csi)) {
        eff = effective_channel(scenario, kTxVehicle, obs.noise_precision_true);
    }

    std::vector<TrialMetrics> rows;
    for (Detector det : kDetectorOrder) {
        if (!cfg.detectors.count(det)) {
            continue;
        }
        TrialMetrics tm;
        tm.snr_db = snr_db;
        tm.detector = det;
        tm.seed = seed;
        tm.trial = trial_index;

        const auto t0 = std::chrono::steady_clock::now();
        try {
            switch (det) {
                case Detector::pacesd: {
                    const UnitaryModel model = unitary_preprocess(dict, obs.y);
                    const PacesdResult res = run_pacesd(model, frame, cfg.frame.alphabet,
                                                        cfg.solver);
                    const auto [err, bits] = count_bit_errors(frame.symbols, res.x_hard,
                                                              frame.pilot_mask,
                                                              cfg.frame.alphabet);
                    tm.ber = static_cast<double>(err) / bits;
                    tm.nmse = nmse_over_active(res.h_hat, h_true, truth_ids);
                    tm.hit = hit_flag(res.support, truth_ids);
                    tm.false_alarm = false_alarm_flag(res.support, truth_ids,
                                                      scenario.total_candidates());
                    tm.iterations = res.iterations_run;
                    break;
                }
                case Detector::mmse: {
                    const DetectResult res = mmse_detect(obs.y, eff, cfg.frame.alphabet);
                    const auto [err, bits] = count_bit_errors(frame.symbols, res.x_hard,
                                                              frame.pilot_mask,
                                                              cfg.frame.alphabet);
                    tm.ber = static_cast<double>(err) / bits;
                    tm.iterations = res.iterations;
                    break;
                }
                case Detector::uamp_csi: {
                    const DetectResult res = uamp_detect_perfect_csi(obs.y, eff,
                                                                     cfg.frame.alphabet,
                                                                     cfg.solver);
                    const auto [err, bits] = count_bit_errors(frame.symbols, res.x_hard,
                                                              frame.pilot_mask,
                                                              cfg.frame.alphabet);
                    tm.ber = static_cast<double>(err) / bits;
                    tm.iterations = res.iterations;
                    break;
                }
                case Detector::oracle_ch: {
                    std::vector<PathOperator> active_ops;
                    for (int id : truth_ids) {
                        const Candidate& c = scenario.candidates[id - 1];
                        active_ops.push_back(
                            build_path_operator(c.l, c.k, c.theta, c.beamformer, cfg.frame));
                    }
                    const CVec h_est = oracle_channel_mmse(obs.y, frame.symbols, active_ops,
                                                           obs.noise_precision_true);
                    double num = 0.0;
                    double den = 0.0;
                    for (size_t i = 0; i < truth_ids.size(); ++i) {
                        num += std::norm(h_est[static_cast<int>(i)] - h_true[truth_ids[i] - 1]);
                        den += std::norm(h_true[truth_ids[i] - 1]);
                    }
                    tm.nmse = num / den;
                    tm.iterations = 1;
                    break;
                }
                case Detector::sbl_known_x: {
                    const PacesdResult res = sbl_channel_known_symbols(
                        obs.y, frame.symbols, dict, cfg.frame.alphabet, cfg.solver);
                    tm.nmse = nmse_over_active(res.h_hat, h_true, truth_ids);
                    tm.hit = hit_flag(res.support, truth_ids);
                    tm.false_alarm = false_alarm_flag(res.support, truth_ids,
                                                      scenario.total_candidates());
                    tm.iterations = res.iterations_run;
                    break;
                }
            }
        } catch (const SolverError&) {
            tm.solver_ok = false;
        }
        const auto t1 = std::chrono::steady_clock::now();
        tm.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        rows.push_back(tm);
    }
    (void)have_dict;
    return rows;
}

namespace {

void write_raw_row(std::ostream& out, const TrialMetrics& tm, bool deterministic) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double nmse_db = std::isnan(tm.nmse) ? nan : 10.0 * std::log10(tm.nmse);
    out << fmt(tm.snr_db) << ',' << detector_name(tm.detector) << ',' << tm.seed << ','
        << tm.trial << ',' << fmt(tm.ber) << ',' << fmt(nmse_db) << ','
        << (tm.hit < 0 ? "nan" : std::to_string(tm.hit)) << ','
        << (tm.false_alarm < 0 ? "nan" : std::to_string(tm.false_alarm)) << ','
        << tm.iterations << ',' << fmt(deterministic ? 0.0 : tm.wall_time_s) << '\n';
}

}  // namespace

SweepSummary sweep(const ExperimentConfig& cfg, std::ostream& out, int n_threads,
                   std::ostream* progress) {
    cfg.validate();
    const int n_snr = static_cast<int>(cfg.snr_grid_db.size());
    const long n_jobs = static_cast<long>(n_snr) * cfg.trials;
    std::vector<std::vector<TrialMetrics>> results(n_jobs);

    const auto run_job = [&](long job) {
        const int snr_idx = static_cast<int>(job / cfg.trials);
        const int trial = static_cast<int>(job % cfg.trials);
        results[job] = run_trial(cfg, cfg.snr_grid_db[snr_idx], trial);
    };

    out << "# pacesd link-level sweep\n";
    out << "# snr: per-frame realized signal power over mean noise power\n";
    out << "# nmse_db: over true-active gains only; hit/false_alarm: detected "
           "support vs ground-truth support\n";
    out << "snr_db,detector,seed,trial,ber,nmse_db,hit,false_alarm,iterations,wall_time_s\n";

    SweepSummary summary;
    long next_to_write = 0;
    const int workers = std::max(1, n_threads);

    for (int snr_idx = 0; snr_idx < n_snr; ++snr_idx) {
        const long begin = static_cast<long>(snr_idx) * cfg.trials;
        const long end = begin + cfg.trials;
        if (workers == 1) {
            for (long job = begin; job < end; ++job) {
                run_job(job);
            }
        } else {
            std::atomic<long> next(begin);
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (long job = next.fetch_add(1); job < end; job = next.fetch_add(1)) {
                        run_job(job);
                    }
                });
            }
            for (std::thread& t : pool) {
                t.join();
            }
        }
        // Flush this SNR point's rows in deterministic order.
        for (; next_to_write < end; ++next_to_write) {
            for (const TrialMetrics& tm : results[next_to_write]) {
                write_raw_row(out, tm, cfg.deterministic_output);
                ++summary.rows_written;
                if (!tm.solver_ok) {
                    ++summary.failed_trials;
                }
            }
        }
        out.flush();
        if (progress) {
            *progress << "snr " << fmt(cfg.snr_grid_db[snr_idx]) << " dB done (" << cfg.trials
                      << " trials)\n";
        }
    }

    // Aggregate table: means per (snr, detector); NMSE aggregates as the
    // dB of the mean ratio.
    out << "# aggregate\n";
    out << "snr_db,detector,trials,failed,mean_ber,nmse_db,hit_rate,false_alarm_rate,"
           "mean_iterations,mean_wall_time_s\n";
    for (int snr_idx = 0; snr_idx < n_snr; ++snr_idx) {
        for (Detector det : kDetectorOrder) {
            if (!cfg.detectors.count(det)) {
                continue;
            }
            long n_rows = 0, n_failed = 0, n_ber = 0, n_nmse = 0, n_hit = 0;
            double ber_sum = 0.0, nmse_sum = 0.0, hit_sum = 0.0, fa_sum = 0.0;
            double iter_sum = 0.0, time_sum = 0.0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const long job = static_cast<long>(snr_idx) * cfg.trials + trial;
                for (const TrialMetrics& tm : results[job]) {
                    if (tm.detector != det) {
                        continue;
                    }
                    ++n_rows;
                    if (!tm.solver_ok) {
                        ++n_failed;
                        continue;
                    }
                    if (!std::isnan(tm.ber)) {
                        ber_sum += tm.ber;
                        ++n_ber;
                    }
                    if (!std::isnan(tm.nmse)) {
                        nmse_sum += tm.nmse;
                        ++n_nmse;
                    }
                    if (tm.hit >= 0) {
                        hit_sum += tm.hit;
                        fa_sum += tm.false_alarm;
                        ++n_hit;
                    }
                    iter_sum += tm.iterations;
                    time_sum += tm.wall_time_s;
                }
            }
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const long n_ok = n_rows - n_failed;
            out << fmt(cfg.snr_grid_db[snr_idx]) << ',' << detector_name(det) << ',' << n_rows
                << ',' << n_failed << ',' << fmt(n_ber ? ber_sum / n_ber : nan) << ','
                << fmt(n_nmse ? 10.0 * std::log10(nmse_sum / n_nmse) : nan) << ','
                << fmt(n_hit ? hit_sum / n_hit : nan) << ','
                << fmt(n_hit ? fa_sum / n_hit : nan) << ','
                << fmt(n_ok ? iter_sum / n_ok : nan) << ','
                << fmt(cfg.deterministic_output ? 0.0 : (n_ok ? time_sum / n_ok : 0.0)) << '\n';
        }
    }
    out.flush();
    return summary;
}

}  // namespace pacesd
