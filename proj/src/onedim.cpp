#include "ersvm/onedim.hpp"

#include <cmath>
#include <stdexcept>

#include "ersvm/simd.hpp"

namespace ersvm {

BCoeffs b_coefficients(double cost, double tau) {
    if (!(cost > 0.0)) throw std::invalid_argument("cost must be positive");
    if (!(tau > 0.0) || !(tau < 1.0)) throw std::invalid_argument("tau must lie strictly in (0,1)");
    const double ct = 2.0 * cost * tau;
    const double cm = 2.0 * cost * (1.0 - tau);
    return {(ct + 1.0) / ct, (cm + 1.0) / cm};
}

double c_value(const DualState& state, std::size_t i) {
    if (i >= state.size()) throw std::out_of_range("coordinate index out of range");
    const double b1 = 1.0 + state.inv_two_c_tau();
    return state.grad_alpha()[i] + b1 * state.alpha()[i] - state.beta()[i];
}

std::pair<double, double> solve_1d(double c, const BCoeffs& k) {
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
    double a = c / k.b1;
    double b = -c / k.b2;
    return {a > 0.0 ? a : 0.0, b > 0.0 ? b : 0.0};
}

double gain_1d(double delta, double eta, double grad_a, double grad_b, const BCoeffs& k) {
    return delta * (grad_a - 0.5 * k.b1 * delta) + eta * (grad_b - 0.5 * k.b2 * eta) + delta * eta;
}

Step1D best_direction_1d(const DualState& state) {
    const BCoeffs k = b_coefficients(state.params().cost, state.params().tau);
    auto hit = simd::best_gain_scan(state.grad_alpha().data(), state.grad_beta().data(),
                                    state.alpha().data(), state.beta().data(), 0, state.size(),
                                    k.b1, k.b2);
    return {hit.index, hit.delta, hit.eta, hit.gain};
}

TrainResult train_1d(DualState& state) {
    const HyperParams& p = state.params();
    TrainResult result;
    GapReport gap = state.duality_gap(p.use_clipped_gap);
    while (!gap.stop()) {
        if (result.iterations >= p.max_iter) {
            result.status = TrainStatus::IterationCap;
            break;
        }
        Step1D step = best_direction_1d(state);
        if (!(step.gain > 0.0)) {
            result.status = TrainStatus::Stalled;
            break;
        }
        state.apply_update_1d(step.index, step.delta, step.eta);
        ++result.iterations;
        gap = state.duality_gap(p.use_clipped_gap);
        if (p.record_trace)
            result.trace.push_back({static_cast<std::uint32_t>(step.index),
                                    static_cast<std::uint32_t>(step.index), step.gain, gap.s});
        if (p.validate_every > 0 && result.iterations % p.validate_every == 0)
            state.validate_consistency();
    }
    result.final_gap = gap;
    return result;
}

} // namespace ersvm
