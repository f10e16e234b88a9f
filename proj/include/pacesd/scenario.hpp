#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "pacesd/otfs.hpp"

namespace pacesd {

// Ground-truth multipath parameters for one propagation path of a vehicle.
struct PathTruth {
    int vehicle_id = 0;  // 1-based
    int l = 0;           // delay index
    int k = 0;           // Doppler index
    double theta = 0.0;  // angle [rad]
    Complex gain{0.0, 0.0};
};

/**
 * One entry of the pooled candidate parameter set the receiver works
 * with. owner_vehicle is the ground-truth label; it is consumed only by
 * the evaluation harness, never by the solver (association is the
 * solver's job).
 */
struct Candidate {
    int candidate_id = 0;    // 1-based, 1..P'
    int l = 0;
    int k = 0;
    double theta = 0.0;
    int owner_vehicle = 0;
    CVec beamformer;         // length n_bs
};

struct Scenario {
    FrameConfig cfg;
    int n_bs = 0;
    std::vector<std::vector<PathTruth>> vehicles;  // index v -> vehicle v+1
    std::vector<Candidate> candidates;             // pooled, size P'
    std::uint64_t rng_seed = 0;

    int total_candidates() const { return static_cast<int>(candidates.size()); }
    // Sparse gain vector over the candidate pool: entry p'-1 is the true
    // gain when candidate p' belongs to vehicle_id, zero otherwise.
    CVec true_gain_vector(int vehicle_id) const;
    // Candidate ids (1-based) owned by vehicle_id.
    std::vector<int> active_candidates(int vehicle_id) const;
};

// Noisy uplink capture of one vehicle's frame, in the DD domain.
struct Observation {
    CVec y;
    double snr_db = 0.0;
    double noise_precision_true = 0.0;  // beta = 1 / E|n|^2 per sample; +inf when noiseless
    int vehicle_id = 0;
};

// Grid indices from physical delay/Doppler: l = round(tau*M*delta_f),
// k = round(nu*N*T), ties toward zero. Throws std::out_of_range when the
// rounded index leaves the grid.
std::pair<int, int> physical_to_index(double tau, double nu, const FrameConfig& cfg);

/**
 * Draws K vehicles' path parameters and pools them into the candidate
 * set. Per vehicle, (l, k) pairs are drawn uniformly without replacement
 * from {0..l_max} x {0..k_max}; angles are uniform on (-pi/2, pi/2);
 * gains are CN(0, 1/P_i). Deterministic given seed. Throws
 * std::invalid_argument when a vehicle asks for more distinct (l, k)
 * pairs than the grid holds.
 */
Scenario generate_scenario(int K, const std::vector<int>& paths_per_vehicle,
                           int l_max, int k_max, int n_bs,
                           const FrameConfig& cfg, std::uint64_t seed);

// Matched receive beamformers f_p = b(theta_p), so f_p^H b(theta_p) = 1.
void design_beamformers(std::vector<Candidate>& candidates, int n_bs);

/**
 * y = sum over vehicle_id's paths of gain * G * x + noise. Noise is
 * circular complex Gaussian; its per-sample variance is set from the
 * realized signal power of this frame so that
 * snr_db = 10 log10(||signal||^2 / E||n||^2). Pass snr_db = +inf to
 * disable noise. Deterministic given seed.
 */
Observation synthesize_uplink(const Scenario& scenario, int vehicle_id,
                              const DdFrame& frame, double snr_db,
                              std::uint64_t seed);

// Flat text exchange format: one candidate per line,
// "id,vehicle,l,k,theta,re_gain,im_gain"; '#' lines are comments.
// Beamformers are not serialized (they are re-derived from theta).
void write_candidates(std::ostream& out, const Scenario& scenario);
// Rebuilds the candidate pool (and per-vehicle truth lists) from the flat
// format; beamformers are re-designed for n_bs antennas.
Scenario read_candidates(std::istream& in, const FrameConfig& cfg, int n_bs);

}  // namespace pacesd
