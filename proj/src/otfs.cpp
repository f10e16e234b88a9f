#include "pacesd/otfs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pacesd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void FrameConfig::validate() const {
    if (M < 1 || N < 1) {
        throw std::invalid_argument("FrameConfig: M and N must be >= 1");
    }
    if (!(delta_f > 0.0)) {
        throw std::invalid_argument("FrameConfig: delta_f must be positive");
    }
    if (alphabet.empty()) {
        throw std::invalid_argument("FrameConfig: alphabet is empty");
    }
    double energy = 0.0;
    for (size_t a = 0; a < alphabet.size(); ++a) {
        energy += std::norm(alphabet[a]);
        for (size_t b = a + 1; b < alphabet.size(); ++b) {
            if (std::abs(alphabet[a] - alphabet[b]) < 1e-12) {
                throw std::invalid_argument("FrameConfig: duplicate alphabet points");
            }
        }
    }
    energy /= static_cast<double>(alphabet.size());
    if (std::abs(energy - 1.0) > 1e-9) {
        throw std::invalid_argument("FrameConfig: alphabet average energy must be 1");
    }
}

std::vector<Complex> bpsk_alphabet() {
    return {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
}

std::vector<Complex> qpsk_alphabet() {
    const double s = 1.0 / std::sqrt(2.0);
    return {Complex(s, s), Complex(-s, s), Complex(-s, -s), Complex(s, -s)};
}

void DdFrame::validate(const FrameConfig& cfg) const {
    const int n = cfg.grid_size();
    if (symbols.size() != n || static_cast<int>(pilot_mask.size()) != n ||
        pilot_values.size() != n) {
        throw std::invalid_argument("DdFrame: size mismatch with frame config");
    }
    for (int i = 0; i < n; ++i) {
        if (pilot_mask[i]) {
            if (std::abs(symbols[i] - pilot_values[i]) > 1e-12) {
                throw std::invalid_argument("DdFrame: pilot symbol differs from pilot value");
            }
            continue;
        }
        bool member = false;
        for (const Complex& a : cfg.alphabet) {
            if (std::abs(symbols[i] - a) < 1e-9) {
                member = true;
                break;
            }
        }
        if (!member) {
            throw std::invalid_argument("DdFrame: data symbol not in alphabet");
        }
    }
}

CMat dft_matrix(int n) {
    if (n < 1) {
        throw std::invalid_argument("dft_matrix: n must be >= 1");
    }
    CMat f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            // a*b mod n keeps the phase argument small for large n
            const double angle = -kTwoPi * static_cast<double>((static_cast<long long>(a) * b) % n) / n;
            f(a, b) = std::polar(scale, angle);
        }
    }
    return f;
}

namespace {

// (F_N^H kron I_M) x as the grid product X F_N^H; transform = F_N^H for
// modulation, F_N for demodulation.
CVec grid_transform(const CVec& x, const FrameConfig& cfg, bool inverse) {
    if (x.size() != cfg.grid_size()) {
        throw std::invalid_argument("otfs transform: vector length != M*N");
    }
    Eigen::Map<const CMat> grid(x.data(), cfg.M, cfg.N);
    const CMat f = dft_matrix(cfg.N);
    CMat out = inverse ? CMat(grid * f.adjoint()) : CMat(grid * f);
    return Eigen::Map<const CVec>(out.data(), out.size());
}

}  // namespace

CVec otfs_modulate(const CVec& x, const FrameConfig& cfg) {
    return grid_transform(x, cfg, /*inverse=*/true);
}

CVec otfs_demodulate(const CVec& r_td, const FrameConfig& cfg) {
    // F_N is symmetric, so (F_N kron I_M) x = vec(X F_N).
    return grid_transform(r_td, cfg, /*inverse=*/false);
}

CVec cyclic_shift(const CVec& v, int l) {
    const int dim = static_cast<int>(v.size());
    if (l < 0 || l >= dim) {
        throw std::out_of_range("cyclic_shift: delay index out of range");
    }
    CVec out(dim);
    for (int i = 0; i < dim; ++i) {
        out[i] = v[(i - l + dim) % dim];
    }
    return out;
}

CMat cyclic_shift_matrix(int l, int dim) {
    if (l < 0 || l >= dim) {
        throw std::out_of_range("cyclic_shift_matrix: delay index out of range");
    }
    CMat p = CMat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        p(i, (i - l + dim) % dim) = 1.0;
    }
    return p;
}

CVec doppler_phase(const CVec& v, int k) {
    const int dim = static_cast<int>(v.size());
    if (k < 0 || k >= dim) {
        throw std::out_of_range("doppler_phase: Doppler index out of range");
    }
    CVec out(dim);
    for (int n = 0; n < dim; ++n) {
        const double angle = kTwoPi * static_cast<double>((static_cast<long long>(k) * n) % dim) / dim;
        out[n] = std::polar(1.0, angle) * v[n];
    }
    return out;
}

CMat doppler_phase_matrix(int k, int dim) {
    if (k < 0 || k >= dim) {
        throw std::out_of_range("doppler_phase_matrix: Doppler index out of range");
    }
    CMat d = CMat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        const double angle = kTwoPi * static_cast<double>((static_cast<long long>(k) * n) % dim) / dim;
        d(n, n) = std::polar(1.0, angle);
    }
    return d;
}

CVec steering_vector(double theta, int n_ant) {
    if (n_ant < 1) {
        throw std::invalid_argument("steering_vector: n_ant must be >= 1");
    }
    CVec b(n_ant);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_ant));
    const double step = std::numbers::pi * std::sin(theta);
    for (int n = 0; n < n_ant; ++n) {
        b[n] = std::polar(scale, step * n);
    }
    return b;
}

CVec PathOperator::apply(const CVec& x) const {
    FrameConfig cfg;
    cfg.M = M;
    cfg.N = N;
    CVec td = otfs_modulate(x, cfg);
    td = doppler_phase(td, k);
    td = cyclic_shift(td, l);
    return scale * otfs_demodulate(td, cfg);
}

CMat PathOperator::dense() const {
    const int d = dim();
    CMat g(d, d);
    CVec e = CVec::Zero(d);
    for (int j = 0; j < d; ++j) {
        e[j] = 1.0;
        g.col(j) = apply(e);
        e[j] = 0.0;
    }
    return g;
}

PathOperator build_path_operator(int l, int k, double theta,
                                 const CVec& beamformer,
                                 const FrameConfig& cfg) {
    const int dim = cfg.grid_size();
    if (l < 0 || l >= dim || k < 0 || k >= dim) {
        throw std::out_of_range("build_path_operator: index out of range");
    }
    const CVec b = steering_vector(theta, static_cast<int>(beamformer.size()));
    PathOperator op;
    op.M = cfg.M;
    op.N = cfg.N;
    op.l = l;
    op.k = k;
    op.scale = beamformer.dot(b);  // f^H b(theta)
    return op;
}

CVec apply_dd_channel(const std::vector<std::pair<Complex, PathOperator>>& paths,
                      const CVec& x) {
    CVec y = CVec::Zero(x.size());
    for (const auto& [gain, op] : paths) {
        if (op.dim() != x.size()) {
            throw std::invalid_argument("apply_dd_channel: operator dimension mismatch");
        }
        y += gain * op.apply(x);
    }
    return y;
}

}  // namespace pacesd
