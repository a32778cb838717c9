#include "simd_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// Vector lanes intentionally avoid FMA so each element goes through the same
// mul/add sequence as the scalar reference (built with -ffp-contract=off).
namespace ersvm::simd::detail {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

double squared_dist_avx2(const double* a, const double* b, std::size_t d) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        __m256d t = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    double out = hsum(acc);
    for (; k < d; ++k) {
        double t = a[k] - b[k];
        out += t * t;
    }
    return out;
}

void gradient_step_avx2(double* ga, double* gb, const double* row, std::size_t n, double step) {
    __m256d vs = _mm256_set1_pd(step);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d t = _mm256_mul_pd(vs, _mm256_loadu_pd(row + k));
        _mm256_storeu_pd(ga + k, _mm256_sub_pd(_mm256_loadu_pd(ga + k), t));
        _mm256_storeu_pd(gb + k, _mm256_add_pd(_mm256_loadu_pd(gb + k), t));
    }
    for (; k < n; ++k) {
        double t = step * row[k];
        ga[k] -= t;
        gb[k] += t;
    }
}

double slack_energy_avx2(const double* ga, const double* alpha, std::size_t n,
                         double inv_two_c_tau, double tau) {
    __m256d vs = _mm256_set1_pd(inv_two_c_tau);
    __m256d vt = _mm256_set1_pd(tau);
    __m256d vmt = _mm256_set1_pd(1.0 - tau);
    __m256d vz = _mm256_setzero_pd();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_add_pd(_mm256_loadu_pd(ga + i),
                                  _mm256_mul_pd(_mm256_loadu_pd(alpha + i), vs));
        __m256d w = _mm256_blendv_pd(vmt, vt, _mm256_cmp_pd(r, vz, _CMP_GE_OQ));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(w, _mm256_mul_pd(r, r)));
    }
    double out = hsum(acc);
    for (; i < n; ++i) {
        double r = ga[i] + alpha[i] * inv_two_c_tau;
        double w = r >= 0.0 ? tau : 1.0 - tau;
        out += w * (r * r);
    }
    return out;
}

double slack_energy_clipped_avx2(const double* ga, const double* alpha, const double* y,
                                 std::size_t n, double inv_two_c_tau, double tau, double m) {
    __m256d vs = _mm256_set1_pd(inv_two_c_tau);
    __m256d vt = _mm256_set1_pd(tau);
    __m256d vmt = _mm256_set1_pd(1.0 - tau);
    __m256d vz = _mm256_setzero_pd();
    __m256d vm = _mm256_set1_pd(m);
    __m256d vnm = _mm256_set1_pd(-m);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d r = _mm256_add_pd(_mm256_loadu_pd(ga + i),
                                  _mm256_mul_pd(_mm256_loadu_pd(alpha + i), vs));
        __m256d f = _mm256_sub_pd(vy, r);
        __m256d fc = _mm256_min_pd(vm, _mm256_max_pd(vnm, f));
        __m256d rc = _mm256_sub_pd(vy, fc);
        __m256d w = _mm256_blendv_pd(vmt, vt, _mm256_cmp_pd(rc, vz, _CMP_GE_OQ));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(w, _mm256_mul_pd(rc, rc)));
    }
    double out = hsum(acc);
    for (; i < n; ++i) {
        double r = ga[i] + alpha[i] * inv_two_c_tau;
        double f = y[i] - r;
        double fc = f > m ? m : (f < -m ? -m : f);
        double rc = y[i] - fc;
        double w = rc >= 0.0 ? tau : 1.0 - tau;
        out += w * (rc * rc);
    }
    return out;
}

ScanHit best_gain_scan_avx2(const double* ga, const double* gb, const double* alpha,
                            const double* beta, std::size_t first, std::size_t last, double b1,
                            double b2) {
    ScanHit best{first, -1.0, 0.0, 0.0};
    const double hb1 = 0.5 * b1;
    const double hb2 = 0.5 * b2;
    std::size_t i = first;

    if (last - first >= 4) {
        __m256d vb1 = _mm256_set1_pd(b1);
        __m256d vb2 = _mm256_set1_pd(b2);
        __m256d vhb1 = _mm256_set1_pd(hb1);
        __m256d vhb2 = _mm256_set1_pd(hb2);
        __m256d vz = _mm256_setzero_pd();
        __m256d bgain = _mm256_set1_pd(-1.0);
        __m256d bidx = _mm256_set1_pd(static_cast<double>(first));
        __m256d bd = vz, be = vz;
        __m256d idx = _mm256_setr_pd(static_cast<double>(first), static_cast<double>(first + 1),
                                     static_cast<double>(first + 2), static_cast<double>(first + 3));
        __m256d four = _mm256_set1_pd(4.0);
        for (; i + 4 <= last; i += 4) {
            __m256d va = _mm256_loadu_pd(alpha + i);
            __m256d vb = _mm256_loadu_pd(beta + i);
            __m256d vga = _mm256_loadu_pd(ga + i);
            __m256d vgb = _mm256_loadu_pd(gb + i);
            __m256d c = _mm256_sub_pd(_mm256_add_pd(vga, _mm256_mul_pd(vb1, va)), vb);
            __m256d ap = _mm256_max_pd(_mm256_div_pd(c, vb1), vz);
            __m256d bp = _mm256_max_pd(_mm256_sub_pd(vz, _mm256_div_pd(c, vb2)), vz);
            __m256d d = _mm256_sub_pd(ap, va);
            __m256d e = _mm256_sub_pd(bp, vb);
            __m256d x = _mm256_sub_pd(vga, _mm256_mul_pd(vhb1, d));
            __m256d y = _mm256_sub_pd(vgb, _mm256_mul_pd(vhb2, e));
            __m256d gain = _mm256_add_pd(
                _mm256_add_pd(_mm256_mul_pd(d, x), _mm256_mul_pd(e, y)), _mm256_mul_pd(d, e));
            __m256d mask = _mm256_cmp_pd(gain, bgain, _CMP_GT_OQ);
            bgain = _mm256_blendv_pd(bgain, gain, mask);
            bidx = _mm256_blendv_pd(bidx, idx, mask);
            bd = _mm256_blendv_pd(bd, d, mask);
            be = _mm256_blendv_pd(be, e, mask);
            idx = _mm256_add_pd(idx, four);
        }
        double lg[4], li[4], ld[4], le[4];
        _mm256_storeu_pd(lg, bgain);
        _mm256_storeu_pd(li, bidx);
        _mm256_storeu_pd(ld, bd);
        _mm256_storeu_pd(le, be);
        for (int l = 0; l < 4; ++l) {
            std::size_t lidx = static_cast<std::size_t>(li[l]);
            if (lg[l] > best.gain || (lg[l] == best.gain && lidx < best.index))
                best = ScanHit{lidx, lg[l], ld[l], le[l]};
        }
    }

    for (; i < last; ++i) {
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

const Ops avx2_table{squared_dist_avx2, gradient_step_avx2, slack_energy_avx2,
                     slack_energy_clipped_avx2, best_gain_scan_avx2};

} // namespace

const Ops* avx2_ops() {
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok ? &avx2_table : nullptr;
}

} // namespace ersvm::simd::detail

#else

namespace ersvm::simd::detail {
const Ops* avx2_ops() { return nullptr; }
} // namespace ersvm::simd::detail

#endif
