#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pacesd/otfs.hpp"
#include "pacesd/scenario.hpp"

namespace pacesd {

/**
 * Stacked per-path operator bank in the column order that turns the
 * multipath model sum_p' h_p' G_p' x into a single linear map acting on
 * the lifted vector c = x kron h:
 *
 *   Psi * (x kron h) = sum_p' h_p' G_p' x,
 *
 * where block Psi_m (dim x P') holds column m of every G_p', i.e.
 * column p' of Psi_m is G_p'[:, m].
 */
struct Dictionary {
    std::vector<PathOperator> operators;  // size P'
    int M = 0;
    int N = 0;
    std::vector<CMat> psi_blocks;         // dim blocks, each dim x P'

    int dim() const { return M * N; }
    int n_candidates() const { return static_cast<int>(operators.size()); }
    // Full dim x (dim*P') matrix [Psi_1, ..., Psi_dim].
    CMat full() const;
    // Psi * (x kron h) without materializing the lifted vector.
    CVec apply_lifted(const CVec& x, const CVec& h) const;
};

Dictionary assemble_dictionary(const std::vector<Candidate>& candidates,
                               const FrameConfig& cfg);

/**
 * Economy SVD form of the dictionary, Psi = U Lambda V^H, used to
 * whiten the model: r = U^H y = Phi c + w with Phi = Lambda V^H and w
 * still white with the original noise precision. Rows of Phi are
 * orthogonal (Phi Phi^H diagonal), the property the message-passing
 * recursions rely on. U column phases are fixed so the largest entry of
 * each column is real positive. Zero singular values are kept so r
 * always has dim entries.
 */
struct UnitaryModel {
    CMat U;                 // dim x dim unitary
    RVec lambda;            // dim singular values, non-increasing
    CMat phi;               // dim x (dim*P'), blocks of P' columns
    RMat phi_block_sq;      // dim x dim; column m = |Phi_m|^2 * 1  (phi_m)
    CVec r;                 // U^H y
    int n_candidates = 0;

    int dim() const { return static_cast<int>(r.size()); }
    Eigen::Block<const CMat> phi_block(int m) const {
        return phi.block(0, m * n_candidates, phi.rows(), n_candidates);
    }
};

UnitaryModel unitary_preprocess(const Dictionary& dict, const CVec& y);

struct SolverConfig {
    int max_iters = 50;
    double rel_tol = 1e-6;
    double eta = 0.0;             // Gamma rate parameter of the gain prior
    double epsilon_init = 1e-3;   // Gamma shape parameter, re-tuned each iteration
    double gamma_init = 1.0;
    double beta_init = 1.0;
    double damping = 1.0;         // 1 = no damping
    double assoc_threshold = 0.05;
    std::ostream* trace = nullptr;  // per-iteration CSV diagnostics when set

    // Called after every completed iteration; used by test suites to
    // audit state validity. Must be thread-safe if trials run in
    // parallel.
    std::function<void(const struct SolverState&)> observer;
};

// Numerical guards shared by the solver family.
constexpr double kVarFloor = 1e-12;
constexpr double kVarCeil = 1e12;
constexpr double kGammaFloor = 1e-10;
constexpr double kGammaCeil = 1e11;

// Raised when a state vector goes non-finite; what() names the solver
// step that produced it.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Full message state of the bilinear solver. Block index m runs over
 * symbol positions (dim blocks), candidate index p' over the pool.
 * Variances are kept strictly positive by clamping; every field is
 * finite after each iteration or the solver aborts with SolverError.
 */
struct SolverState {
    int iteration = 0;

    CMat c_mean;        // P' x dim, column m = posterior mean of c_m
    RVec c_var;         // per-block scalar variance
    RVec plaus_var;     // v_p
    CVec plaus;         // p (pre-noise output with Onsager correction)
    CVec zeta_mean;     // posterior of the noiseless transformed output
    RVec zeta_var;
    CVec residual;      // z
    RVec residual_var;  // v_z
    CMat q_mean;        // P' x dim pseudo-observations of c
    RVec q_var;         // per-block scalar
    CMat h_fwd_mean;    // P' x dim, per-block messages toward the gains
    RVec h_fwd_var;     // per-block scalar
    CVec h_hat;         // gain belief means, length P'
    RVec v_h_elem;      // per-element belief variances (pre-averaging)
    double v_h = 1.0;   // averaged belief variance
    CVec x_fwd_mean;    // combined per-symbol pseudo-observations
    RVec x_fwd_var;
    CVec x_hat;         // symbol belief means, length dim
    RVec v_x_elem;
    double v_x = 1.0;
    RVec gamma;         // learned gain precisions
    double epsilon = 0.0;
    double beta = 1.0;  // learned noise precision
};

struct PacesdResult {
    CVec h_hat;
    double v_h = 0.0;
    std::vector<int> support;   // candidate ids declared active (1-based)
    CVec x_soft;
    CVec x_hard;                // alphabet symbols; pilots carry pilot values
    double beta_hat = 0.0;
    RVec gamma_hat;
    int iterations_run = 0;
    bool converged = false;
};

// Posterior mean/variance of one discrete symbol under a Gaussian
// pseudo-observation q with variance v. A pilot collapses the posterior
// onto the known value (variance at the floor). Weights use
// max-subtraction so extreme v never overflows.
struct DenoiseResult {
    Complex mean;
    double var;
};
DenoiseResult symbol_denoiser(Complex q, double v,
                              const std::vector<Complex>& alphabet,
                              const std::optional<Complex>& pilot = std::nullopt);

// Learned precision of one gain: (2*eps + 1) / (|h|^2 + v_h + 2*eta),
// clamped to [kGammaFloor, kGammaCeil].
double gamma_update(Complex h_hat, double v_h, double eps, double eta);

// Shape re-tuning from the precision spread,
// eps = 0.5 * sqrt(log(mean(gamma)) - mean(log(gamma))); the radicand is
// nonnegative up to rounding and is clamped at zero.
double epsilon_update(const RVec& gamma);

// Gaussian belief of the gains: combines the forward message with the
// zero-mean prior of precision gamma, elementwise.
void channel_posterior(const CVec& fwd_mean, const RVec& fwd_var,
                       const RVec& gamma, CVec& h_hat, RVec& v_h);

// Support rule: candidate p' is active iff |h[p']|^2 > threshold * max
// energy. An all-zero estimate yields an empty support.
std::vector<int> associate(const CVec& h_hat, double threshold);

/**
 * Runs the message-passing loop for joint association, channel
 * estimation and detection on the whitened model. Non-convergence
 * within max_iters is reported through PacesdResult::converged, not an
 * error; non-finite state aborts with SolverError naming the step.
 */
PacesdResult run_pacesd(const UnitaryModel& model, const DdFrame& frame,
                        const std::vector<Complex>& alphabet,
                        const SolverConfig& cfg);

}  // namespace pacesd
