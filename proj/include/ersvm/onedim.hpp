#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ersvm/dual_state.hpp"

namespace ersvm {

// Update coefficients b1 = (2 C tau + 1) / (2 C tau) and
// b2 = (2 C (1 - tau) + 1) / (2 C (1 - tau)); both exceed 1.
struct BCoeffs {
    double b1 = 0.0;
    double b2 = 0.0;
};

BCoeffs b_coefficients(double cost, double tau);

// Right-hand side of the single-coordinate stationarity system, evaluated
// from the stored gradient (no kernel access).
double c_value(const DualState& state, std::size_t i);

// Exact maximizer of the single-coordinate restriction over the feasible
// quadrant: (max(0, c/b1), max(0, -c/b2)). At most one component is positive;
// the unconstrained stationary point is infeasible whenever c != 0.
std::pair<double, double> solve_1d(double c, const BCoeffs& k);

// Exact objective improvement of the step (delta, eta) at a coordinate with
// gradients (grad_a, grad_b).
double gain_1d(double delta, double eta, double grad_a, double grad_b, const BCoeffs& k);

struct Step1D {
    std::size_t index = 0;
    double delta = 0.0;
    double eta = 0.0;
    double gain = 0.0;
};

// Full scan for the single coordinate whose exact update improves the dual
// objective most; ties go to the lowest index.
Step1D best_direction_1d(const DualState& state);

enum class TrainStatus { Converged, IterationCap, Stalled };

struct TraceEntry {
    std::uint32_t i = 0;
    std::uint32_t j = 0; // equals i for single-coordinate updates
    double gain = 0.0;
    double s = 0.0;
};

struct TrainResult {
    TrainStatus status = TrainStatus::Converged;
    std::uint64_t iterations = 0;
    GapReport final_gap;
    std::vector<TraceEntry> trace; // filled when params.record_trace is set

    bool converged() const { return status == TrainStatus::Converged; }
};

// Single-coordinate solver: repeats best direction search, exact update and
// gap evaluation until S <= epsilon / (2 lambda), the iteration cap, or a
// fully stalled scan.
TrainResult train_1d(DualState& state);

} // namespace ersvm
