#pragma once

#include <vector>

#include "pacesd/otfs.hpp"
#include "pacesd/scenario.hpp"
#include "pacesd/solver.hpp"

namespace pacesd {

// Dense end-to-end channel of the transmitting vehicle under perfect CSI
// and perfect association, plus the true noise precision (may be +inf
// for noiseless captures).
struct EffectiveChannel {
    CMat H;
    double beta_true = 0.0;
};

EffectiveChannel effective_channel(const Scenario& scenario, int vehicle_id,
                                   double beta_true);

struct DetectResult {
    CVec x_soft;
    CVec x_hard;
    int iterations = 0;
    bool converged = true;
};

// Linear MMSE equalizer with a unit-energy symbol prior:
// x_soft = H^H (H H^H + beta^-1 I)^-1 y, hard decisions by nearest
// alphabet point. Uses the true noise precision.
DetectResult mmse_detect(const CVec& y, const EffectiveChannel& eff,
                         const std::vector<Complex>& alphabet);

// Iterative detector on the whitened linear model with perfect CSI; the
// per-symbol posterior goes through the same symbol_denoiser as the
// joint solver, so comparisons isolate the cost of not knowing the
// channel. Serves as the BER bound.
DetectResult uamp_detect_perfect_csi(const CVec& y, const EffectiveChannel& eff,
                                     const std::vector<Complex>& alphabet,
                                     const SolverConfig& cfg);

// Oracle channel estimate with known symbols and perfect association:
// regressors A = [G_1 x, ..., G_P x], returns
// (A^H A + beta^-1 I)^-1 A^H y (unit-variance gain prior). Output length
// equals the number of active paths.
CVec oracle_channel_mmse(const CVec& y, const CVec& x_true,
                         const std::vector<PathOperator>& active_ops,
                         double beta_true);

// Sparse gain recovery over the full candidate pool with all symbols
// clamped to their true values (an all-pilot frame); the NMSE reference
// for the joint solver.
PacesdResult sbl_channel_known_symbols(const CVec& y, const CVec& x_true,
                                       const Dictionary& dict,
                                       const std::vector<Complex>& alphabet,
                                       const SolverConfig& cfg);

// Index of the nearest alphabet point (lowest index wins ties).
int hard_decision_index(Complex x, const std::vector<Complex>& alphabet);
CVec hard_decisions(const CVec& soft, const std::vector<Complex>& alphabet);

}  // namespace pacesd
