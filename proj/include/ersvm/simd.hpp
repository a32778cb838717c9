#pragma once

#include <cstddef>
#include <string>

// Runtime-dispatched inner loops. Every operation has a scalar reference
// implementation and, where available, an AVX2 (x86-64) or NEON (aarch64)
// variant. The element-wise kernels (squared distance terms, gradient steps,
// gain formulas) use the same operation sequence in every lane so the scalar
// and vector paths agree bit for bit; reductions may differ by rounding order
// and are equivalence-tested under a tolerance instead.
namespace ersvm::simd {

enum class Backend { Scalar, Avx2, Neon };

// Backend picked at startup: best supported lane, overridable with the
// ERSVM_SIMD environment variable (scalar|avx2|neon).
Backend active();
const char* backend_name(Backend b);
bool supported(Backend b);
// Force a backend (tests). Throws std::invalid_argument if unsupported here.
void set_backend(Backend b);

// ||a - b||^2 over d entries.
double squared_dist(const double* a, const double* b, std::size_t d);

// ga[k] -= step * row[k]; gb[k] += step * row[k]
void gradient_step(double* ga, double* gb, const double* row, std::size_t n, double step);

// Asymmetric squared-slack energy: sum_i w(r_i) * r_i^2 with
// r_i = ga[i] + alpha[i] * inv_two_c_tau and w(r) = tau for r >= 0,
// 1 - tau otherwise.
double slack_energy(const double* ga, const double* alpha, std::size_t n,
                    double inv_two_c_tau, double tau);

// Clipped variant: the fitted value y_i - r_i is clamped to [-m, m] before
// the residual is re-formed.
double slack_energy_clipped(const double* ga, const double* alpha, const double* y,
                            std::size_t n, double inv_two_c_tau, double tau, double m);

struct ScanHit {
    std::size_t index;
    double gain;
    double delta;
    double eta;
};

// Single-coordinate gain scan over [first, last): for each i the exact
// coordinate-wise maximizer is formed from the stored gradients and the gain
// it would realize is evaluated; the best index wins, ties to the lowest.
ScanHit best_gain_scan(const double* ga, const double* gb, const double* alpha,
                       const double* beta, std::size_t first, std::size_t last,
                       double b1, double b2);

} // namespace ersvm::simd
