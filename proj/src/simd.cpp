#include "simd_impl.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace ersvm::simd {

namespace detail {

namespace {

double squared_dist_scalar(const double* a, const double* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        double t = a[k] - b[k];
        acc += t * t;
    }
    return acc;
}

void gradient_step_scalar(double* ga, double* gb, const double* row, std::size_t n, double step) {
    for (std::size_t k = 0; k < n; ++k) {
        double t = step * row[k];
        ga[k] -= t;
        gb[k] += t;
    }
}

double slack_energy_scalar(const double* ga, const double* alpha, std::size_t n,
                           double inv_two_c_tau, double tau) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ga[i] + alpha[i] * inv_two_c_tau;
        double w = r >= 0.0 ? tau : 1.0 - tau;
        acc += w * (r * r);
    }
    return acc;
}

double slack_energy_clipped_scalar(const double* ga, const double* alpha, const double* y,
                                   std::size_t n, double inv_two_c_tau, double tau, double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ga[i] + alpha[i] * inv_two_c_tau;
        double f = y[i] - r;
        double fc = f > m ? m : (f < -m ? -m : f);
        double rc = y[i] - fc;
        double w = rc >= 0.0 ? tau : 1.0 - tau;
        acc += w * (rc * rc);
    }
    return acc;
}

ScanHit best_gain_scan_scalar(const double* ga, const double* gb, const double* alpha,
                              const double* beta, std::size_t first, std::size_t last,
                              double b1, double b2) {
    ScanHit best{first, -1.0, 0.0, 0.0};
    const double hb1 = 0.5 * b1;
    const double hb2 = 0.5 * b2;
    for (std::size_t i = first; i < last; ++i) {
        double c = ga[i] + b1 * alpha[i] - beta[i];
        double qa = c / b1;
        double qb = c / b2;
        double ap = qa > 0.0 ? qa : 0.0;
        double bp = 0.0 - qb > 0.0 ? 0.0 - qb : 0.0;
        double d = ap - alpha[i];
        double e = bp - beta[i];
        double x = ga[i] - hb1 * d;
        double y = gb[i] - hb2 * e;
        double gain = (d * x + e * y) + d * e;
        if (gain > best.gain) best = ScanHit{i, gain, d, e};
    }
    return best;
}

} // namespace

const Ops scalar_ops{squared_dist_scalar, gradient_step_scalar, slack_energy_scalar,
                     slack_energy_clipped_scalar, best_gain_scan_scalar};

#if defined(__aarch64__)

namespace {

double squared_dist_neon(const double* a, const double* b, std::size_t d) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= d; k += 2) {
        float64x2_t t = vsubq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
        acc = vaddq_f64(acc, vmulq_f64(t, t));
    }
    double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; k < d; ++k) {
        double t = a[k] - b[k];
        out += t * t;
    }
    return out;
}

void gradient_step_neon(double* ga, double* gb, const double* row, std::size_t n, double step) {
    float64x2_t vs = vdupq_n_f64(step);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t t = vmulq_f64(vs, vld1q_f64(row + k));
        vst1q_f64(ga + k, vsubq_f64(vld1q_f64(ga + k), t));
        vst1q_f64(gb + k, vaddq_f64(vld1q_f64(gb + k), t));
    }
    for (; k < n; ++k) {
        double t = step * row[k];
        ga[k] -= t;
        gb[k] += t;
    }
}

double slack_energy_neon(const double* ga, const double* alpha, std::size_t n,
                         double inv_two_c_tau, double tau) {
    float64x2_t vs = vdupq_n_f64(inv_two_c_tau);
    float64x2_t vt = vdupq_n_f64(tau);
    float64x2_t vmt = vdupq_n_f64(1.0 - tau);
    float64x2_t vz = vdupq_n_f64(0.0);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vaddq_f64(vld1q_f64(ga + i), vmulq_f64(vld1q_f64(alpha + i), vs));
        uint64x2_t ge = vcgeq_f64(r, vz);
        float64x2_t w = vbslq_f64(ge, vt, vmt);
        acc = vaddq_f64(acc, vmulq_f64(w, vmulq_f64(r, r)));
    }
    double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        double r = ga[i] + alpha[i] * inv_two_c_tau;
        double w = r >= 0.0 ? tau : 1.0 - tau;
        out += w * (r * r);
    }
    return out;
}

} // namespace

const Ops neon_table{squared_dist_neon, gradient_step_neon, slack_energy_neon,
                     slack_energy_clipped_scalar, best_gain_scan_scalar};

const Ops* neon_ops() { return &neon_table; }

#else

const Ops* neon_ops() { return nullptr; }

#endif

} // namespace detail

namespace {

Backend resolve() {
    if (const char* env = std::getenv("ERSVM_SIMD")) {
        std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && detail::avx2_ops()) return Backend::Avx2;
        if (v == "neon" && detail::neon_ops()) return Backend::Neon;
        return Backend::Scalar;
    }
    if (detail::avx2_ops()) return Backend::Avx2;
    if (detail::neon_ops()) return Backend::Neon;
    return Backend::Scalar;
}

Backend& current() {
    static Backend b = resolve();
    return b;
}

const detail::Ops& ops_for(Backend b) {
    switch (b) {
        case Backend::Avx2: return *detail::avx2_ops();
        case Backend::Neon: return *detail::neon_ops();
        default: return detail::scalar_ops;
    }
}

const detail::Ops& ops() { return ops_for(current()); }

} // namespace

Backend active() { return current(); }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
        default: return "scalar";
    }
}

bool supported(Backend b) {
    switch (b) {
        case Backend::Avx2: return detail::avx2_ops() != nullptr;
        case Backend::Neon: return detail::neon_ops() != nullptr;
        default: return true;
    }
}

void set_backend(Backend b) {
    if (!supported(b))
        throw std::invalid_argument(std::string("simd backend not available: ") + backend_name(b));
    current() = b;
}

double squared_dist(const double* a, const double* b, std::size_t d) {
    return ops().squared_dist(a, b, d);
}

void gradient_step(double* ga, double* gb, const double* row, std::size_t n, double step) {
    ops().gradient_step(ga, gb, row, n, step);
}

double slack_energy(const double* ga, const double* alpha, std::size_t n, double inv_two_c_tau,
                    double tau) {
    return ops().slack_energy(ga, alpha, n, inv_two_c_tau, tau);
}

double slack_energy_clipped(const double* ga, const double* alpha, const double* y, std::size_t n,
                            double inv_two_c_tau, double tau, double m) {
    return ops().slack_energy_clipped(ga, alpha, y, n, inv_two_c_tau, tau, m);
}

ScanHit best_gain_scan(const double* ga, const double* gb, const double* alpha, const double* beta,
                       std::size_t first, std::size_t last, double b1, double b2) {
    return ops().best_gain_scan(ga, gb, alpha, beta, first, last, b1, b2);
}

} // namespace ersvm::simd
