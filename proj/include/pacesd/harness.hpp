#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "pacesd/baselines.hpp"
#include "pacesd/otfs.hpp"
#include "pacesd/scenario.hpp"
#include "pacesd/solver.hpp"

namespace pacesd {

// Configuration problems (bad file, bad key, bad value). The CLI maps
// these to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Detector { pacesd, mmse, uamp_csi, oracle_ch, sbl_known_x };
std::string detector_name(Detector d);

struct ExperimentConfig {
    FrameConfig frame;            // frame.modulation selects the alphabet
    std::string modulation = "qpsk";
    int K = 3;
    std::vector<int> paths_per_vehicle{2, 2, 2};
    int l_max = 3;
    int k_max = 3;
    int n_bs = 16;
    double pilot_fraction = 1.0 / 16.0;
    std::vector<double> snr_grid_db{0, 5, 10, 15, 20};
    int trials = 100;
    std::uint64_t base_seed = 1;
    SolverConfig solver;
    std::set<Detector> detectors{Detector::pacesd, Detector::mmse, Detector::uamp_csi,
                                 Detector::oracle_ch, Detector::sbl_known_x};
    // When set (the default), wall_time_s columns are written as 0 so
    // repeated runs of the same config produce byte-identical CSV.
    bool deterministic_output = true;

    void validate() const;  // throws ConfigError
};

// Flat "key = value" file, '#' comments, keys match the field paths
// (frame.M, scenario.K, solver.max_iters, ...). Unknown keys are hard
// errors.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(std::istream& in);

// One Monte Carlo outcome. Metrics a detector does not produce (e.g.
// BER for a channel-only estimator) are NaN / -1 and serialize as
// "nan". NMSE is computed over the true-active gains only, so
// association mistakes show up in hit/false_alarm rather than NMSE.
struct TrialMetrics {
    double snr_db = 0.0;
    Detector detector = Detector::pacesd;
    std::uint64_t seed = 0;
    int trial = 0;
    double ber = std::numeric_limits<double>::quiet_NaN();
    double nmse = std::numeric_limits<double>::quiet_NaN();  // linear ratio; CSV carries 10*log10
    int hit = -1;          // 1 iff every true-active candidate was detected
    int false_alarm = -1;  // 1 iff any inactive candidate was declared active
    int iterations = 0;
    double wall_time_s = 0.0;
    bool solver_ok = true;  // false when the solver aborted on this trial
};

// Binary-reflected Gray code of log2(alphabet_size) bits, MSB first.
// Throws ConfigError unless alphabet_size is a power of two.
std::vector<int> gray_bits(int symbol_index, int alphabet_size);

// Bit errors between two hard-decision vectors over the non-pilot
// positions, under the Gray mapping of the alphabet; returns
// {errors, total_bits}.
std::pair<long, long> count_bit_errors(const CVec& tx, const CVec& rx,
                                       const std::vector<bool>& pilot_mask,
                                       const std::vector<Complex>& alphabet);

// Support metrics against the ground-truth active set (candidate ids).
int hit_flag(const std::vector<int>& support, const std::vector<int>& truth);
int false_alarm_flag(const std::vector<int>& support, const std::vector<int>& truth,
                     int total_candidates);

// Data frame with seeded pilot positions; pilot symbols are regular
// random data symbols that the receiver additionally knows.
DdFrame random_frame(const FrameConfig& cfg, double pilot_fraction, std::uint64_t seed);

// Runs one seeded trial: fresh scenario, fresh frame, synthesized
// observation, every enabled detector. Deterministic given
// (base_seed, snr_db, trial_index). Solver aborts are recorded as failed
// rows, not rethrown.
std::vector<TrialMetrics> run_trial(const ExperimentConfig& cfg, double snr_db,
                                    int trial_index);

struct SweepSummary {
    long rows_written = 0;
    long failed_trials = 0;
};

// Full snr_grid x trials sweep. Raw per-trial rows stream out in
// deterministic (snr, trial, detector) order followed by an aggregate
// table; n_threads > 1 parallelizes over trials without changing any
// output byte.
SweepSummary sweep(const ExperimentConfig& cfg, std::ostream& out, int n_threads = 1,
                   std::ostream* progress = nullptr);

// Named constellation lookup ("bpsk" or "qpsk").
std::vector<Complex> alphabet_by_name(const std::string& name);

}  // namespace pacesd
