#include "pacesd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pacesd {

CVec Scenario::true_gain_vector(int vehicle_id) const {
    CVec h = CVec::Zero(total_candidates());
    bool known = false;
    for (const auto& per_vehicle : vehicles) {
        for (const PathTruth& p : per_vehicle) {
            if (p.vehicle_id == vehicle_id) {
                known = true;
            }
        }
    }
    if (!known) {
        throw std::invalid_argument("Scenario: unknown vehicle id");
    }
    // Candidates are pooled in truth order, so candidate p' pairs with the
    // path of the same id; gains are looked up through the owner label.
    for (int i = 0; i < total_candidates(); ++i) {
        const Candidate& c = candidates[i];
        if (c.owner_vehicle != vehicle_id) {
            continue;
        }
        for (const PathTruth& p : vehicles[c.owner_vehicle - 1]) {
            if (p.l == c.l && p.k == c.k && p.theta == c.theta) {
                h[i] = p.gain;
                break;
            }
        }
    }
    return h;
}

std::vector<int> Scenario::active_candidates(int vehicle_id) const {
    std::vector<int> ids;
    for (const Candidate& c : candidates) {
        if (c.owner_vehicle == vehicle_id) {
            ids.push_back(c.candidate_id);
        }
    }
    return ids;
}

namespace {

// Nearest integer, with exact .5 ties rounded toward zero.
int round_ties_to_zero(double v) {
    const double down = std::floor(v);
    const double frac = v - down;
    if (frac > 0.5) {
        return static_cast<int>(down) + 1;
    }
    if (frac < 0.5) {
        return static_cast<int>(down);
    }
    return v >= 0.0 ? static_cast<int>(down) : static_cast<int>(down) + 1;
}

}  // namespace

std::pair<int, int> physical_to_index(double tau, double nu, const FrameConfig& cfg) {
    const int l = round_ties_to_zero(tau * cfg.M * cfg.delta_f);
    const int k = round_ties_to_zero(nu * cfg.N * cfg.slot_duration());
    if (l < 0 || l > cfg.M - 1) {
        throw std::out_of_range("physical_to_index: delay index off the grid");
    }
    if (k < 0 || k > cfg.N - 1) {
        throw std::out_of_range("physical_to_index: Doppler index off the grid");
    }
    return {l, k};
}

Scenario generate_scenario(int K, const std::vector<int>& paths_per_vehicle,
                           int l_max, int k_max, int n_bs,
                           const FrameConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (K < 1 || static_cast<int>(paths_per_vehicle.size()) != K) {
        throw std::invalid_argument("generate_scenario: paths_per_vehicle must list K entries");
    }
    if (l_max < 0 || l_max > cfg.M - 1 || k_max < 0 || k_max > cfg.N - 1) {
        throw std::invalid_argument("generate_scenario: l_max/k_max outside the grid");
    }
    if (n_bs < 1) {
        throw std::invalid_argument("generate_scenario: n_bs must be >= 1");
    }
    const int grid = (l_max + 1) * (k_max + 1);
    int total_paths = 0;
    for (int p_i : paths_per_vehicle) {
        if (p_i < 1) {
            throw std::invalid_argument("generate_scenario: every vehicle needs >= 1 path");
        }
        total_paths += p_i;
    }
    // (l,k) pairs are distinct across the whole pool: with matched
    // beamformers every per-path scale f^H b equals one, so candidates
    // sharing a cell would be identical operators and no receiver could
    // tell them apart.
    if (total_paths > grid) {
        throw std::invalid_argument(
            "generate_scenario: more paths than distinct (l,k) cells");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle_dist(-std::numbers::pi / 2.0,
                                                      std::numbers::pi / 2.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Scenario sc;
    sc.cfg = cfg;
    sc.n_bs = n_bs;
    sc.rng_seed = seed;
    sc.vehicles.resize(K);

    // Partial Fisher-Yates over the flattened (l,k) grid, consumed
    // vehicle by vehicle.
    std::vector<int> cells(grid);
    for (int i = 0; i < grid; ++i) {
        cells[i] = i;
    }
    int next_cell = 0;
    for (int v = 0; v < K; ++v) {
        const int p_i = paths_per_vehicle[v];
        const double gain_sd = std::sqrt(0.5 / p_i);  // CN(0, 1/P_i) per path
        for (int p = 0; p < p_i; ++p) {
            std::uniform_int_distribution<int> pick(next_cell, grid - 1);
            std::swap(cells[next_cell], cells[pick(rng)]);
            PathTruth path;
            path.vehicle_id = v + 1;
            path.l = cells[next_cell] % (l_max + 1);
            path.k = cells[next_cell] / (l_max + 1);
            path.theta = angle_dist(rng);
            path.gain = Complex(normal(rng) * gain_sd, normal(rng) * gain_sd);
            sc.vehicles[v].push_back(path);
            ++next_cell;
        }
    }

    int id = 1;
    for (int v = 0; v < K; ++v) {
        for (const PathTruth& p : sc.vehicles[v]) {
            Candidate c;
            c.candidate_id = id++;
            c.l = p.l;
            c.k = p.k;
            c.theta = p.theta;
            c.owner_vehicle = p.vehicle_id;
            sc.candidates.push_back(c);
        }
    }
    design_beamformers(sc.candidates, n_bs);
    return sc;
}

void design_beamformers(std::vector<Candidate>& candidates, int n_bs) {
    for (Candidate& c : candidates) {
        c.beamformer = steering_vector(c.theta, n_bs);
    }
}

Observation synthesize_uplink(const Scenario& scenario, int vehicle_id,
                              const DdFrame& frame, double snr_db,
                              std::uint64_t seed) {
    if (frame.symbols.size() != scenario.cfg.grid_size()) {
        throw std::invalid_argument("synthesize_uplink: frame does not match scenario config");
    }
    const CVec h_true = scenario.true_gain_vector(vehicle_id);  // validates vehicle_id

    std::vector<std::pair<Complex, PathOperator>> paths;
    for (int i = 0; i < scenario.total_candidates(); ++i) {
        const Candidate& c = scenario.candidates[i];
        if (c.owner_vehicle != vehicle_id) {
            continue;
        }
        paths.emplace_back(h_true[i],
                           build_path_operator(c.l, c.k, c.theta, c.beamformer, scenario.cfg));
    }

    Observation obs;
    obs.vehicle_id = vehicle_id;
    obs.snr_db = snr_db;
    obs.y = apply_dd_channel(paths, frame.symbols);

    const double signal_energy = obs.y.squaredNorm();
    if (std::isinf(snr_db) || signal_energy == 0.0) {
        // The per-frame SNR definition scales noise off the realized
        // signal power; a zero-power frame pins the noise at zero.
        obs.noise_precision_true = std::numeric_limits<double>::infinity();
        return obs;
    }

    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    const double sample_var = signal_energy / (snr_lin * scenario.cfg.grid_size());
    obs.noise_precision_true = 1.0 / sample_var;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(sample_var / 2.0));
    for (int i = 0; i < obs.y.size(); ++i) {
        obs.y[i] += Complex(normal(rng), normal(rng));
    }
    return obs;
}

void write_candidates(std::ostream& out, const Scenario& scenario) {
    out << "# id,vehicle,l,k,theta,re_gain,im_gain\n";
    out.precision(17);
    for (const Candidate& c : scenario.candidates) {
        Complex gain{0.0, 0.0};
        for (const PathTruth& p : scenario.vehicles[c.owner_vehicle - 1]) {
            if (p.l == c.l && p.k == c.k && p.theta == c.theta) {
                gain = p.gain;
                break;
            }
        }
        out << c.candidate_id << ',' << c.owner_vehicle << ',' << c.l << ',' << c.k << ','
            << c.theta << ',' << gain.real() << ',' << gain.imag() << '\n';
    }
}

Scenario read_candidates(std::istream& in, const FrameConfig& cfg, int n_bs) {
    Scenario sc;
    sc.cfg = cfg;
    sc.n_bs = n_bs;

    std::string line;
    int max_vehicle = 0;
    std::vector<PathTruth> paths;
    std::vector<Candidate> candidates;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 7) {
            throw std::invalid_argument("read_candidates: expected 7 comma-separated fields");
        }
        Candidate c;
        PathTruth p;
        c.candidate_id = std::stoi(fields[0]);
        c.owner_vehicle = std::stoi(fields[1]);
        c.l = std::stoi(fields[2]);
        c.k = std::stoi(fields[3]);
        c.theta = std::stod(fields[4]);
        p.vehicle_id = c.owner_vehicle;
        p.l = c.l;
        p.k = c.k;
        p.theta = c.theta;
        p.gain = Complex(std::stod(fields[5]), std::stod(fields[6]));
        max_vehicle = std::max(max_vehicle, c.owner_vehicle);
        candidates.push_back(c);
        paths.push_back(p);
    }
    if (candidates.empty()) {
        throw std::invalid_argument("read_candidates: no candidate lines found");
    }
    sc.vehicles.resize(max_vehicle);
    for (const PathTruth& p : paths) {
        if (p.vehicle_id < 1) {
            throw std::invalid_argument("read_candidates: vehicle ids are 1-based");
        }
        sc.vehicles[p.vehicle_id - 1].push_back(p);
    }
    sc.candidates = std::move(candidates);
    design_beamformers(sc.candidates, n_bs);
    return sc;
}

}  // namespace pacesd
