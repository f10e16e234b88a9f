#include "pacesd/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pacesd {

EffectiveChannel effective_channel(const Scenario& scenario, int vehicle_id,
                                   double beta_true) {
    const CVec h = scenario.true_gain_vector(vehicle_id);
    const int d = scenario.cfg.grid_size();
    EffectiveChannel eff;
    eff.H = CMat::Zero(d, d);
    eff.beta_true = beta_true;
    for (int i = 0; i < scenario.total_candidates(); ++i) {
        const Candidate& c = scenario.candidates[i];
        if (c.owner_vehicle != vehicle_id) {
            continue;
        }
        const PathOperator op =
            build_path_operator(c.l, c.k, c.theta, c.beamformer, scenario.cfg);
        eff.H += h[i] * op.dense();
    }
    return eff;
}

int hard_decision_index(Complex x, const std::vector<Complex>& alphabet) {
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

CVec hard_decisions(const CVec& soft, const std::vector<Complex>& alphabet) {
    CVec out(soft.size());
    for (int i = 0; i < soft.size(); ++i) {
        out[i] = alphabet[hard_decision_index(soft[i], alphabet)];
    }
    return out;
}

DetectResult mmse_detect(const CVec& y, const EffectiveChannel& eff,
                         const std::vector<Complex>& alphabet) {
    const int d = static_cast<int>(y.size());
    if (eff.H.rows() != d || eff.H.cols() != d) {
        throw std::invalid_argument("mmse_detect: channel dimension mismatch");
    }
    const double beta_inv = std::isinf(eff.beta_true) ? 0.0 : 1.0 / eff.beta_true;
    CMat a = eff.H * eff.H.adjoint();
    a.diagonal().array() += beta_inv;
    const CVec u = a.ldlt().solve(y);
    DetectResult res;
    res.x_soft = eff.H.adjoint() * u;
    res.x_hard = hard_decisions(res.x_soft, alphabet);
    res.iterations = 1;
    return res;
}

DetectResult uamp_detect_perfect_csi(const CVec& y, const EffectiveChannel& eff,
                                     const std::vector<Complex>& alphabet,
                                     const SolverConfig& cfg) {
    const int d = static_cast<int>(y.size());
    if (eff.H.rows() != d || eff.H.cols() != d) {
        throw std::invalid_argument("uamp_detect_perfect_csi: channel dimension mismatch");
    }
    const double beta_inv = std::isinf(eff.beta_true) ? 0.0 : 1.0 / eff.beta_true;

    // Whiten through the Gram route, as in unitary_preprocess.
    CMat gram = eff.H * eff.H.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(gram);
    if (es.info() != Eigen::Success) {
        throw SolverError("uamp_detect_perfect_csi: eigendecomposition failed");
    }
    const CMat u = es.eigenvectors().rowwise().reverse();
    const CMat phi = u.adjoint() * eff.H;
    const CVec r = u.adjoint() * y;
    const RVec phi_row_sq = phi.cwiseAbs2().rowwise().sum();
    const RMat phi_abs2 = phi.cwiseAbs2();

    CVec x_hat = CVec::Zero(d);
    double v_x = 1.0;
    CVec s = CVec::Zero(d);
    CVec x_prev;
    DetectResult res;
    res.converged = false;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        res.iterations = iter;
        CVec p(d);
        RVec v_s(d);
        for (int i = 0; i < d; ++i) {
            const double v_p = std::clamp(phi_row_sq[i] * v_x, kVarFloor, kVarCeil);
            p[i] = (phi.row(i) * x_hat)(0) - v_p * s[i];
            v_s[i] = 1.0 / (v_p + beta_inv);
            s[i] = v_s[i] * (r[i] - p[i]);
        }
        const double v_q = std::clamp(d / (phi_abs2.transpose() * v_s).sum(), kVarFloor, kVarCeil);
        const CVec q = x_hat + v_q * (phi.adjoint() * s);

        double v_acc = 0.0;
        for (int i = 0; i < d; ++i) {
            const DenoiseResult post = symbol_denoiser(q[i], v_q, alphabet);
            x_hat[i] = post.mean;
            v_acc += post.var;
        }
        v_x = std::clamp(v_acc / d, kVarFloor, kVarCeil);

        if (x_prev.size() > 0) {
            const double prev_norm = x_prev.norm();
            if (prev_norm > 0.0 && (x_hat - x_prev).norm() / prev_norm < cfg.rel_tol) {
                res.converged = true;
                break;
            }
        }
        x_prev = x_hat;
    }

    res.x_soft = x_hat;
    res.x_hard = hard_decisions(x_hat, alphabet);
    return res;
}

CVec oracle_channel_mmse(const CVec& y, const CVec& x_true,
                         const std::vector<PathOperator>& active_ops,
                         double beta_true) {
    const int p = static_cast<int>(active_ops.size());
    if (p == 0) {
        return CVec();
    }
    CMat a(y.size(), p);
    for (int i = 0; i < p; ++i) {
        a.col(i) = active_ops[i].apply(x_true);
    }
    const double beta_inv = std::isinf(beta_true) ? 0.0 : 1.0 / beta_true;
    CMat normal = a.adjoint() * a;
    normal.diagonal().array() += beta_inv;
    return normal.ldlt().solve(a.adjoint() * y);
}

PacesdResult sbl_channel_known_symbols(const CVec& y, const CVec& x_true,
                                       const Dictionary& dict,
                                       const std::vector<Complex>& alphabet,
                                       const SolverConfig& cfg) {
    DdFrame frame;
    frame.symbols = x_true;
    frame.pilot_mask.assign(x_true.size(), true);
    frame.pilot_values = x_true;
    const UnitaryModel model = unitary_preprocess(dict, y);
    return run_pacesd(model, frame, alphabet, cfg);
}

}  // namespace pacesd
