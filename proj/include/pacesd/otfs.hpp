#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace pacesd {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/**
 * OTFS frame geometry and constellation.
 *
 * Data symbols live on an M x N delay-Doppler grid (M delay bins =
 * subcarriers, N Doppler bins = time slots). The slot duration T is
 * always 1/delta_f; it is derived, never stored. The alphabet must have
 * unit average energy so SNR definitions stay unambiguous.
 */
struct FrameConfig {
    int M = 16;                      // delay bins (subcarriers)
    int N = 8;                       // Doppler bins (time slots)
    double delta_f = 15e3;           // subcarrier spacing [Hz]
    double f_c = 4e9;                // carrier frequency [Hz]
    std::vector<Complex> alphabet;   // ordered constellation points

    int grid_size() const { return M * N; }          // total symbols per frame
    double slot_duration() const { return 1.0 / delta_f; }

    // Throws std::invalid_argument on bad dimensions or a non-unit-energy
    // / degenerate alphabet.
    void validate() const;
};

// Named constellations (unit average energy, Gray-friendly ordering:
// consecutive indices are geometric neighbours).
std::vector<Complex> bpsk_alphabet();
std::vector<Complex> qpsk_alphabet();

/**
 * One delay-Doppler frame: the vectorized symbol grid x = vec(X)
 * (column-major, x[m + n*M] = X[m,n]) plus the pilot overlay. Pilot
 * positions carry symbols known at the receiver; pilot_values holds the
 * known value at every masked position (entries elsewhere are ignored).
 */
struct DdFrame {
    CVec symbols;                  // length M*N
    std::vector<bool> pilot_mask;  // length M*N
    CVec pilot_values;             // length M*N, meaningful where mask is set

    Eigen::Map<const CMat> grid(const FrameConfig& cfg) const {
        return Eigen::Map<const CMat>(symbols.data(), cfg.M, cfg.N);
    }
    // Checks sizes, alphabet membership of data symbols and pilot
    // consistency. Throws std::invalid_argument.
    void validate(const FrameConfig& cfg) const;
};

// Unitary n-point DFT matrix, F[a,b] = exp(-j 2 pi a b / n) / sqrt(n).
CMat dft_matrix(int n);

// DD grid -> time domain: s = (F_N^H kron I_M) x. Unitary, so ||s|| = ||x||.
CVec otfs_modulate(const CVec& x, const FrameConfig& cfg);

// Time domain -> DD grid: (F_N kron I_M) r. Inverse of otfs_modulate.
CVec otfs_demodulate(const CVec& r_td, const FrameConfig& cfg);

// Forward cyclic delay by l: (shift(v, l))[i] = v[(i - l) mod dim].
CVec cyclic_shift(const CVec& v, int l);
CMat cyclic_shift_matrix(int l, int dim);

// Doppler progression: (phase(v, k))[n] = exp(j 2 pi k n / dim) * v[n].
CVec doppler_phase(const CVec& v, int k);
CMat doppler_phase_matrix(int k, int dim);

// Uniform linear array response, b[n] = exp(j pi n sin(theta)) / sqrt(n_ant).
CVec steering_vector(double theta, int n_ant);

/**
 * Per-path delay-Doppler channel operator
 *
 *   G = scale * (F_N kron I_M) Pi^l Delta^k (F_N^H kron I_M),
 *
 * with scale = f^H b(theta) for the receive beamformer f. G is a scalar
 * times a unitary matrix; apply() runs the fast modulate/shift/phase/
 * demodulate pipeline, dense() materializes the matrix column by column.
 */
struct PathOperator {
    int M = 0;
    int N = 0;
    int l = 0;
    int k = 0;
    Complex scale{1.0, 0.0};

    int dim() const { return M * N; }
    CVec apply(const CVec& x) const;
    CMat dense() const;
};

PathOperator build_path_operator(int l, int k, double theta,
                                 const CVec& beamformer,
                                 const FrameConfig& cfg);

// Noiseless multipath response sum_p gain_p * G_p x. An empty path list
// yields the zero vector (no association).
CVec apply_dd_channel(const std::vector<std::pair<Complex, PathOperator>>& paths,
                      const CVec& x);

}  // namespace pacesd
