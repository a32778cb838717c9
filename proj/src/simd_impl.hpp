#pragma once

#include "ersvm/simd.hpp"

namespace ersvm::simd::detail {

struct Ops {
    double (*squared_dist)(const double*, const double*, std::size_t);
    void (*gradient_step)(double*, double*, const double*, std::size_t, double);
    double (*slack_energy)(const double*, const double*, std::size_t, double, double);
    double (*slack_energy_clipped)(const double*, const double*, const double*, std::size_t,
                                   double, double, double);
    ScanHit (*best_gain_scan)(const double*, const double*, const double*, const double*,
                              std::size_t, std::size_t, double, double);
};

extern const Ops scalar_ops;

// nullptr when the lane is not compiled in or the CPU lacks it
const Ops* avx2_ops();
const Ops* neon_ops();

} // namespace ersvm::simd::detail
