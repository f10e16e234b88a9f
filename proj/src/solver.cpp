#include "pacesd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace pacesd {

CMat Dictionary::full() const {
    const int d = dim();
    const int p = n_candidates();
    CMat psi(d, d * p);
    for (int m = 0; m < d; ++m) {
        psi.middleCols(m * p, p) = psi_blocks[m];
    }
    return psi;
}

CVec Dictionary::apply_lifted(const CVec& x, const CVec& h) const {
    if (x.size() != dim() || h.size() != n_candidates()) {
        throw std::invalid_argument("Dictionary::apply_lifted: size mismatch");
    }
    CVec y = CVec::Zero(dim());
    for (int m = 0; m < dim(); ++m) {
        y += x[m] * (psi_blocks[m] * h);
    }
    return y;
}

Dictionary assemble_dictionary(const std::vector<Candidate>& candidates,
                               const FrameConfig& cfg) {
    if (candidates.empty()) {
        throw std::invalid_argument("assemble_dictionary: empty candidate pool");
    }
    Dictionary dict;
    dict.M = cfg.M;
    dict.N = cfg.N;
    const int d = dict.dim();
    const int p_total = static_cast<int>(candidates.size());
    dict.operators.reserve(p_total);
    for (const Candidate& c : candidates) {
        if (c.beamformer.size() == 0) {
            throw std::invalid_argument("assemble_dictionary: candidate lacks a beamformer");
        }
        dict.operators.push_back(build_path_operator(c.l, c.k, c.theta, c.beamformer, cfg));
    }
    dict.psi_blocks.assign(d, CMat(d, p_total));
    CVec e = CVec::Zero(d);
    for (int p = 0; p < p_total; ++p) {
        for (int m = 0; m < d; ++m) {
            e[m] = 1.0;
            const CVec col = dict.operators[p].apply(e);  // column m of G_p
            e[m] = 0.0;
            dict.psi_blocks[m].col(p) = col;
        }
    }
    return dict;
}

UnitaryModel unitary_preprocess(const Dictionary& dict, const CVec& y) {
    const int d = dict.dim();
    if (y.size() != d) {
        throw std::invalid_argument("unitary_preprocess: observation length mismatch");
    }
    const CMat psi = dict.full();

    // Thin SVD of the wide dictionary: all d singular values are kept
    // (zeros included) so r keeps the observation length.
    Eigen::BDCSVD<CMat> svd(psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw SolverError("unitary_preprocess: SVD failed");
    }

    UnitaryModel model;
    model.n_candidates = dict.n_candidates();
    model.U = svd.matrixU();
    model.lambda = svd.singularValues();
    CMat v = svd.matrixV();

    // Phase convention: rotate each column of U so its largest entry is
    // real positive; rotating the matching column of V by the same phase
    // leaves U Lambda V^H unchanged.
    for (int j = 0; j < d; ++j) {
        int imax = 0;
        model.U.col(j).cwiseAbs().maxCoeff(&imax);
        const Complex pivot = model.U(imax, j);
        if (std::abs(pivot) > 0.0) {
            const Complex rot = std::conj(pivot) / std::abs(pivot);
            model.U.col(j) *= rot;
            v.col(j) *= rot;
        }
    }

    model.phi = model.lambda.asDiagonal() * v.adjoint();
    model.r = model.U.adjoint() * y;
    model.phi_block_sq.resize(d, d);
    for (int m = 0; m < d; ++m) {
        model.phi_block_sq.col(m) = model.phi_block(m).cwiseAbs2().rowwise().sum();
    }
    return model;
}

namespace {

// For quantities nonnegative by construction (posterior variances, sums
// of squares): plain range clamp.
inline double clamp_var(double v) {
    return std::clamp(v, kVarFloor, kVarCeil);
}

inline void clamp_var(RVec& v) {
    for (int i = 0; i < v.size(); ++i) {
        v[i] = clamp_var(v[i]);
    }
}

inline void check_finite(const CVec& v, const char* step) {
    if (!v.allFinite()) {
        throw SolverError(std::string("run_pacesd: non-finite value at ") + step);
    }
}

inline void check_finite(const CMat& v, const char* step) {
    if (!v.allFinite()) {
        throw SolverError(std::string("run_pacesd: non-finite value at ") + step);
    }
}

int nearest_symbol(Complex x, const std::vector<Complex>& alphabet) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < alphabet.size(); ++a) {
        const double dist = std::norm(x - alphabet[a]);
        if (dist < best_d) {
            best_d = dist;
            best = static_cast<int>(a);
        }
    }
    return best;
}

}  // namespace

DenoiseResult symbol_denoiser(Complex q, double v,
                              const std::vector<Complex>& alphabet,
                              const std::optional<Complex>& pilot) {
    if (!std::isfinite(q.real()) || !std::isfinite(q.imag()) || !std::isfinite(v) || v <= 0.0) {
        throw std::invalid_argument("symbol_denoiser: non-finite observation or variance");
    }
    if (pilot.has_value()) {
        return {*pilot, kVarFloor};
    }
    if (alphabet.empty()) {
        throw std::invalid_argument("symbol_denoiser: empty alphabet");
    }
    const size_t n = alphabet.size();
    double dmin = std::numeric_limits<double>::infinity();
    std::vector<double> d(n);
    for (size_t a = 0; a < n; ++a) {
        d[a] = std::norm(alphabet[a] - q) / v;
        dmin = std::min(dmin, d[a]);
    }
    double total = 0.0;
    std::vector<double> w(n);
    for (size_t a = 0; a < n; ++a) {
        w[a] = std::exp(dmin - d[a]);
        total += w[a];
    }
    Complex mean{0.0, 0.0};
    for (size_t a = 0; a < n; ++a) {
        mean += (w[a] / total) * alphabet[a];
    }
    double var = 0.0;
    for (size_t a = 0; a < n; ++a) {
        var += (w[a] / total) * std::norm(alphabet[a] - mean);
    }
    return {mean, clamp_var(var)};
}

double gamma_update(Complex h_hat, double v_h, double eps, double eta) {
    const double denom = std::norm(h_hat) + v_h + 2.0 * eta;
    if (!(denom > 0.0)) {
        return kGammaCeil;
    }
    const double g = (2.0 * eps + 1.0) / denom;
    if (!std::isfinite(g)) {
        return kGammaCeil;
    }
    return std::clamp(g, kGammaFloor, kGammaCeil);
}

double epsilon_update(const RVec& gamma) {
    const double mean = gamma.mean();
    const double mean_log = gamma.array().log().mean();
    const double radicand = std::max(0.0, std::log(mean) - mean_log);
    return 0.5 * std::sqrt(radicand);
}

void channel_posterior(const CVec& fwd_mean, const RVec& fwd_var,
                       const RVec& gamma, CVec& h_hat, RVec& v_h) {
    const int p = static_cast<int>(fwd_mean.size());
    h_hat.resize(p);
    v_h.resize(p);
    for (int i = 0; i < p; ++i) {
        v_h[i] = clamp_var(1.0 / (1.0 / fwd_var[i] + gamma[i]));
        h_hat[i] = fwd_mean[i] * (v_h[i] / fwd_var[i]);
    }
}

std::vector<int> associate(const CVec& h_hat, double threshold) {
    std::vector<int> support;
    if (h_hat.size() == 0) {
        return support;
    }
    const double peak = h_hat.cwiseAbs2().maxCoeff();
    for (int i = 0; i < h_hat.size(); ++i) {
        if (std::norm(h_hat[i]) > threshold * peak) {
            support.push_back(i + 1);
        }
    }
    return support;
}

PacesdResult run_pacesd(const UnitaryModel& model, const DdFrame& frame,
                        const std::vector<Complex>& alphabet,
                        const SolverConfig& cfg) {
    const int d = model.dim();
    const int p = model.n_candidates;
    if (frame.symbols.size() != d || static_cast<int>(frame.pilot_mask.size()) != d ||
        frame.pilot_values.size() != d) {
        throw std::invalid_argument("run_pacesd: frame does not match model dimension");
    }
    if (alphabet.empty() || cfg.max_iters < 1) {
        throw std::invalid_argument("run_pacesd: bad configuration");
    }
    check_finite(model.r, "input (transformed observation)");

    const double lam = cfg.damping;

    SolverState st;
    st.c_mean = CMat::Zero(p, d);
    st.c_var = RVec::Ones(d);
    st.residual = CVec::Zero(d);
    st.residual_var = RVec::Ones(d);
    st.beta = clamp_var(cfg.beta_init);
    st.gamma = RVec::Constant(p, std::clamp(cfg.gamma_init, kGammaFloor, kGammaCeil));
    st.epsilon = cfg.epsilon_init;
    st.x_hat = CVec::Zero(d);
    for (int i = 0; i < d; ++i) {
        if (frame.pilot_mask[i]) {
            st.x_hat[i] = frame.pilot_values[i];
        }
    }
    st.v_x = 1.0;
    st.v_x_elem = RVec::Ones(d);
    st.h_hat = CVec::Zero(p);
    st.v_h = 1.0;

    Eigen::Map<CVec> c_flat(st.c_mean.data(), p * d);
    CVec c_prev;
    std::vector<int> hard_prev(d, -1);
    bool converged = false;

    if (cfg.trace) {
        *cfg.trace << "iter,beta,epsilon,mean_gamma,c_norm,symbol_flips\n";
    }

    // Scratch arrays (element index p' x block index m).
    CMat bx_mean(p, d), bh_mean(p, d), bc_mean(p, d);
    RMat bx_var(p, d), bc_var(p, d);
    RVec bh_var(d);

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        st.iteration = iter;

        // steps 1-2: plausibility of the transformed output, with the
        // correction term that decorrelates successive iterations
        st.plaus_var = model.phi_block_sq * st.c_var;
        clamp_var(st.plaus_var);
        st.plaus = model.phi * c_flat;
        for (int i = 0; i < d; ++i) {
            st.plaus[i] -= st.plaus_var[i] * st.residual[i];
        }

        // steps 3-4: posterior of the noiseless output
        st.zeta_var.resize(d);
        st.zeta_mean.resize(d);
        for (int i = 0; i < d; ++i) {
            const double denom = 1.0 + st.beta * st.plaus_var[i];
            st.zeta_var[i] = clamp_var(st.plaus_var[i] / denom);
            st.zeta_mean[i] = (st.beta * st.plaus_var[i] * model.r[i] + st.plaus[i]) / denom;
        }
        check_finite(st.zeta_mean, "step 4 (output posterior)");

        // step 5: noise precision re-estimate
        st.beta = clamp_var(d / ((model.r - st.zeta_mean).squaredNorm() + st.zeta_var.sum()));

        // steps 6-7: scaled residual
        CVec z_new(d);
        st.residual_var.resize(d);
        for (int i = 0; i < d; ++i) {
            st.residual_var[i] = clamp_var(1.0 / (st.plaus_var[i] + 1.0 / st.beta));
            z_new[i] = st.residual_var[i] * (model.r[i] - st.plaus[i]);
        }
        st.residual = (iter == 1 || lam >= 1.0) ? z_new
                                                : CVec(lam * z_new + (1.0 - lam) * st.residual);

        // steps 8-9: per-block pseudo-observations of the lifted vector
        const RVec phi_vz = model.phi_block_sq.transpose() * st.residual_var;
        st.q_var.resize(d);
        for (int m = 0; m < d; ++m) {
            st.q_var[m] = clamp_var(p / phi_vz[m]);
        }
        CVec corr_flat = model.phi.adjoint() * st.residual;
        Eigen::Map<CMat> corr(corr_flat.data(), p, d);
        st.q_mean = st.c_mean + corr * st.q_var.asDiagonal();
        check_finite(st.q_mean, "step 9 (pseudo-observations)");

        // steps 10-11: per-block messages toward the gains, using the
        // symbol belief from the previous iteration
        st.h_fwd_var.resize(d);
        st.h_fwd_mean.resize(p, d);
        for (int m = 0; m < d; ++m) {
            const double xe = std::norm(st.x_hat[m]) + st.v_x;
            st.h_fwd_var[m] = clamp_var(st.q_var[m] / xe);
            st.h_fwd_mean.col(m) = st.q_mean.col(m) * (std::conj(st.x_hat[m]) / xe);
        }

        // steps 12-13: combine the blocks into one Gaussian message
        double fwd_prec = 0.0;
        CVec fwd_acc = CVec::Zero(p);
        for (int m = 0; m < d; ++m) {
            fwd_prec += 1.0 / st.h_fwd_var[m];
            fwd_acc += st.h_fwd_mean.col(m) / st.h_fwd_var[m];
        }
        const double h_fwd_comb_var = clamp_var(1.0 / fwd_prec);
        const CVec h_fwd_comb = h_fwd_comb_var * fwd_acc;

        // steps 14-15: gain belief under the learned Gaussian-Gamma prior,
        // precision and shape re-tuning, then variance averaging
        channel_posterior(h_fwd_comb, RVec::Constant(p, h_fwd_comb_var), st.gamma,
                          st.h_hat, st.v_h_elem);
        for (int i = 0; i < p; ++i) {
            st.gamma[i] = gamma_update(st.h_hat[i], st.v_h_elem[i], st.epsilon, cfg.eta);
        }
        st.epsilon = epsilon_update(st.gamma);
        st.v_h = st.v_h_elem.mean();
        check_finite(st.h_hat, "step 15 (gain belief)");

        // steps 16-19: combined per-symbol pseudo-observations
        RVec gain_energy(p);
        double energy_sum = 0.0;
        for (int i = 0; i < p; ++i) {
            gain_energy[i] = std::norm(st.h_hat[i]) + st.v_h;
            energy_sum += gain_energy[i];
        }
        st.x_fwd_var.resize(d);
        st.x_fwd_mean.resize(d);
        for (int m = 0; m < d; ++m) {
            st.x_fwd_var[m] = clamp_var(st.q_var[m] / energy_sum);
            st.x_fwd_mean[m] = st.h_hat.dot(st.q_mean.col(m)) / energy_sum;
        }

        // steps 20-21: discrete symbol posterior (pilots collapse to their
        // known value), then variance averaging
        st.v_x_elem.resize(d);
        int flips = 0;
        for (int m = 0; m < d; ++m) {
            std::optional<Complex> pilot;
            if (frame.pilot_mask[m]) {
                pilot = frame.pilot_values[m];
            }
            const DenoiseResult post =
                symbol_denoiser(st.x_fwd_mean[m], st.x_fwd_var[m], alphabet, pilot);
            st.x_hat[m] = post.mean;
            st.v_x_elem[m] = post.var;
            if (cfg.trace) {
                const int hard = nearest_symbol(post.mean, alphabet);
                if (hard != hard_prev[m]) {
                    ++flips;
                }
                hard_prev[m] = hard;
            }
        }
        st.v_x = st.v_x_elem.mean();
        check_finite(st.x_hat, "step 21 (symbol belief)");

        // steps 22-25: extrinsic messages back to the lifted vector, by
        // Gaussian division of the beliefs by the forward messages
        for (int m = 0; m < d; ++m) {
            for (int i = 0; i < p; ++i) {
                const double fv = clamp_var(st.q_var[m] / gain_energy[i]);
                const Complex fm = st.q_mean(i, m) * std::conj(st.h_hat[i]) / gain_energy[i];
                const double prec = 1.0 / st.v_x - 1.0 / fv;
                if (prec > 0.0 && std::isfinite(prec)) {
                    bx_var(i, m) = clamp_var(1.0 / prec);
                    bx_mean(i, m) = bx_var(i, m) * (st.x_hat[m] / st.v_x - fm / fv);
                } else {
                    bx_var(i, m) = kVarCeil;
                    bx_mean(i, m) = Complex(0.0, 0.0);
                }
            }
            const double prec_h = 1.0 / st.v_h - 1.0 / st.h_fwd_var[m];
            if (prec_h > 0.0 && std::isfinite(prec_h)) {
                bh_var[m] = clamp_var(1.0 / prec_h);
                bh_mean.col(m) =
                    bh_var[m] * (st.h_hat / st.v_h - st.h_fwd_mean.col(m) / st.h_fwd_var[m]);
            } else {
                bh_var[m] = kVarCeil;
                bh_mean.col(m).setZero();
            }
        }

        // steps 26-27: product message for c = x * h
        for (int m = 0; m < d; ++m) {
            for (int i = 0; i < p; ++i) {
                bc_mean(i, m) = bx_mean(i, m) * bh_mean(i, m);
                bc_var(i, m) = clamp_var(std::norm(bx_mean(i, m)) * bh_var[m] +
                                         bx_var(i, m) * std::norm(bh_mean(i, m)) +
                                         bx_var(i, m) * bh_var[m]);
            }
        }

        // steps 28-30: block posterior of c and variance averaging
        for (int m = 0; m < d; ++m) {
            double var_acc = 0.0;
            for (int i = 0; i < p; ++i) {
                const double vc = clamp_var(1.0 / (1.0 / st.q_var[m] + 1.0 / bc_var(i, m)));
                const Complex mc =
                    vc * (st.q_mean(i, m) / st.q_var[m] + bc_mean(i, m) / bc_var(i, m));
                var_acc += vc;
                if (lam >= 1.0) {
                    st.c_mean(i, m) = mc;
                } else {
                    st.c_mean(i, m) = lam * mc + (1.0 - lam) * st.c_mean(i, m);
                }
            }
            st.c_var[m] = clamp_var(var_acc / p);
        }
        check_finite(st.c_mean, "step 30 (block posterior)");

        if (cfg.trace) {
            *cfg.trace << iter << ',' << st.beta << ',' << st.epsilon << ',' << st.gamma.mean()
                       << ',' << c_flat.norm() << ',' << flips << '\n';
        }
        if (cfg.observer) {
            cfg.observer(st);
        }

        if (c_prev.size() > 0) {
            const double prev_norm = c_prev.norm();
            if (prev_norm > 0.0 && (c_flat - c_prev).norm() / prev_norm < cfg.rel_tol) {
                converged = true;
                break;
            }
        }
        c_prev = c_flat;
    }

    PacesdResult result;
    result.h_hat = st.h_hat;
    result.v_h = st.v_h;
    result.support = associate(st.h_hat, cfg.assoc_threshold);
    result.x_soft = st.x_hat;
    result.x_hard.resize(d);
    for (int m = 0; m < d; ++m) {
        result.x_hard[m] = frame.pilot_mask[m]
                               ? frame.pilot_values[m]
                               : alphabet[nearest_symbol(st.x_hat[m], alphabet)];
    }
    result.beta_hat = st.beta;
    result.gamma_hat = st.gamma;
    result.iterations_run = st.iteration;
    result.converged = converged;
    return result;
}

}  // namespace pacesd
