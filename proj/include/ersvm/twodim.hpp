#pragma once

#include <array>
#include <cstdint>

#include "ersvm/onedim.hpp"

namespace ersvm {

// Reduced two-coordinate system: right-hand sides c_i, c_j, the kernel value
// k = K_ij with |k| <= 1, and the shared update coefficients.
struct PairCoeffs {
    std::size_t i = 0;
    std::size_t j = 0;
    double c_i = 0.0;
    double c_j = 0.0;
    double k = 0.0;
    BCoeffs coeffs;
};

PairCoeffs pair_coeffs(DualState& state, std::size_t i, std::size_t j);

// T1 = k c_j - b2 c_i, T2 = k c_i - b2 c_j, T3 = b1 c_i - k c_j,
// T4 = b1 c_j - k c_i: the shared numerators of the four boundary solutions.
std::array<double, 4> t_values(const PairCoeffs& pc);

// Determinant of the 4x4 stationarity system; positive for b1, b2 >= 1 and
// |k| <= 1, and equal to (b1 b2 - 1)^2 at k = 0.
double det_m(double b1, double b2, double k);

// Exact maximizer of the two-coordinate restriction over the feasible region.
// case_id 1..4 names which pair of variables stays at zero
// (1: both alphas, 2: both betas, 3: alpha_i & beta_j, 4: beta_i & alpha_j);
// case_id 0 is the all-zero solution for c_i = c_j = 0.
struct Solution2D {
    double alpha_i = 0.0;
    double beta_i = 0.0;
    double alpha_j = 0.0;
    double beta_j = 0.0;
    int case_id = 0;
};

Solution2D solve_2d(const PairCoeffs& pc);

// 1D gain of both coordinates minus the kernel cross term.
double gain_2d(double delta_i, double eta_i, double grad_ai, double grad_bi, double delta_j,
               double eta_j, double grad_aj, double grad_bj, double k, const BCoeffs& coeffs);

struct Step2D {
    std::size_t i = 0;
    std::size_t j = 0;
    double delta_i = 0.0;
    double eta_i = 0.0;
    double delta_j = 0.0;
    double eta_j = 0.0;
    double gain = 0.0;
    int case_id = 0;
};

// Exact step and gain for updating the pair (i, j) from the current state.
Step2D pair_step(DualState& state, std::size_t i, std::size_t j);

// Pair updated in the previous iteration, when there was one.
struct PairMemory {
    bool valid = false;
    std::size_t i = 0;
    std::size_t j = 0;
};

// Best 1D directions of the two index halves; after the first iteration the
// exact 2D gain is compared over all pairings of the previous and the fresh
// directions. Ties prefer the pair containing the lowest index.
Step2D select_wss1(DualState& state, const PairMemory& memory);

// Fixes the first direction chosen by WSS1 and picks the partner with the
// best exact 2D gain among its nearest neighbors; ties to the lowest index.
Step2D select_wss2(DualState& state, const KnnIndex& knn, const PairMemory& memory);

// Two-coordinate solver; selection strategy comes from state.params().wss.
// A WSS2 run builds its own neighbor index when none is passed in.
TrainResult train_2d(DualState& state, const KnnIndex* knn = nullptr);

} // namespace ersvm
