#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ersvm/core.hpp"
#include "ersvm/kernel.hpp"

namespace ersvm {

// Duality gap split S = T + C * E, with the stopping threshold
// epsilon / (2 lambda) attached.
struct GapReport {
    double t_part = 0.0;
    double e_part = 0.0;
    double s = 0.0;
    double threshold = 0.0;
    bool clipped = false;

    bool stop() const { return s <= threshold; }
};

// Mutable optimization state: the nonnegative dual vectors alpha and beta,
// their gradients, and the incrementally maintained T component of the gap.
// E is cheap but cannot be maintained incrementally, so the gap evaluation
// recomputes it from the gradients each time.
class DualState {
public:
    static DualState cold_start(const TrainingSet& data, const HyperParams& params,
                                KernelCache& cache);

    // Recycles a solution trained at cost c_old for a session at c_new > c_old
    // (any positive c_new works): alpha and beta are kept, the gradients and T
    // absorb the change of the quadratic terms.
    static DualState warm_start(const DualState& prev, double c_old, double c_new);

    // One exact coordinate update at i: alpha[i] += delta, beta[i] += eta.
    // All gradients and T are maintained; costs one kernel row. Values landing
    // within 1e-14 of zero are snapped to exactly zero; anything below that is
    // an infeasible step and rejected.
    void apply_update_1d(std::size_t i, double delta, double eta);

    // Two-coordinate variant; costs two kernel rows plus the cross correction.
    void apply_update_2d(std::size_t i, std::size_t j, double delta_i, double eta_i,
                         double delta_j, double eta_j);

    // (xi_plus, xi_minus) for sample i; at most one of the pair is positive.
    // The clipped variant forms the residual against the fitted value clamped
    // to [-M, M].
    std::pair<double, double> slacks(std::size_t i, bool clipped) const;

    GapReport duality_gap(bool clipped) const;

    // From-scratch dual objective W(alpha, beta); O(n) kernel rows.
    double dual_objective() const;

    // Recomputes gradients, T and E from scratch and throws std::logic_error
    // if the incrementally maintained values drifted beyond tol (relative,
    // with an absolute floor of tol itself).
    void validate_consistency(double tol = 1e-6) const;

    std::size_t size() const { return alpha_.size(); }
    const TrainingSet& data() const { return *data_; }
    KernelCache& cache() const { return *cache_; }
    const HyperParams& params() const { return params_; }
    std::span<const double> alpha() const { return alpha_; }
    std::span<const double> beta() const { return beta_; }
    std::span<const double> grad_alpha() const { return ga_; }
    std::span<const double> grad_beta() const { return gb_; }
    double t_part() const { return t_; }
    std::uint64_t iter_count() const { return iters_; }

    // 1 / (2 C tau) and 1 / (2 C (1 - tau)), shared with the closed-form steps
    double inv_two_c_tau() const { return inv2ct_; }
    double inv_two_c_mtau() const { return inv2cmt_; }

private:
    DualState() = default;
    void refresh_derived();
    double fitted(std::size_t i) const; // <e_i, K(alpha - beta)> from the gradient
    double t_decrement(std::size_t i, double delta, double eta) const;

    const TrainingSet* data_ = nullptr;
    KernelCache* cache_ = nullptr;
    HyperParams params_;
    std::vector<double> alpha_, beta_, ga_, gb_;
    double t_ = 0.0;
    std::uint64_t iters_ = 0;
    double inv2ct_ = 0.0, inv2cmt_ = 0.0;
};

} // namespace ersvm
