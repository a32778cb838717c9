#include <doctest.h>

#include <cmath>
#include <vector>

#include "ersvm/rng.hpp"
#include "ersvm/simd.hpp"

using namespace ersvm;

TEST_SUITE_BEGIN("simd");

namespace {

struct BackendGuard {
    simd::Backend saved = simd::active();
    ~BackendGuard() { simd::set_backend(saved); }
};

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

} // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(simd::supported(simd::Backend::Scalar));
    BackendGuard guard;
    simd::set_backend(simd::Backend::Scalar);
    CHECK(simd::active() == simd::Backend::Scalar);
}

TEST_CASE("vector lanes agree with the scalar reference") {
    std::vector<simd::Backend> lanes;
    if (simd::supported(simd::Backend::Avx2)) lanes.push_back(simd::Backend::Avx2);
    if (simd::supported(simd::Backend::Neon)) lanes.push_back(simd::Backend::Neon);
    if (lanes.empty()) return;

    Rng rng(99);
    BackendGuard guard;
    for (auto lane : lanes) {
        for (std::size_t n : {1ul, 3ul, 4ul, 7ul, 64ul, 257ul}) {
            auto a = random_vec(rng, n);
            auto b = random_vec(rng, n);
            auto alpha = random_vec(rng, n, 0.0, 2.0);
            auto beta = random_vec(rng, n, 0.0, 2.0);
            auto y = random_vec(rng, n, -1.0, 1.0);
            double b1 = rng.uniform(1.01, 8.0), b2 = rng.uniform(1.01, 8.0);
            double s = rng.uniform(0.1, 3.0);
            double tau = rng.uniform(0.1, 0.9);

            simd::set_backend(simd::Backend::Scalar);
            double dist_s = simd::squared_dist(a.data(), b.data(), n);
            double energy_s = simd::slack_energy(a.data(), alpha.data(), n, s, tau);
            double clipped_s =
                simd::slack_energy_clipped(a.data(), alpha.data(), y.data(), n, s, tau, 1.0);
            auto scan_s = simd::best_gain_scan(a.data(), b.data(), alpha.data(), beta.data(), 0, n,
                                               b1, b2);
            auto ga_s = a, gb_s = b;
            simd::gradient_step(ga_s.data(), gb_s.data(), y.data(), n, s);

            simd::set_backend(lane);
            double dist_v = simd::squared_dist(a.data(), b.data(), n);
            double energy_v = simd::slack_energy(a.data(), alpha.data(), n, s, tau);
            double clipped_v =
                simd::slack_energy_clipped(a.data(), alpha.data(), y.data(), n, s, tau, 1.0);
            auto scan_v = simd::best_gain_scan(a.data(), b.data(), alpha.data(), beta.data(), 0, n,
                                               b1, b2);
            auto ga_v = a, gb_v = b;
            simd::gradient_step(ga_v.data(), gb_v.data(), y.data(), n, s);

            // reductions may reassociate
            CHECK(dist_v == doctest::Approx(dist_s).epsilon(1e-13));
            CHECK(energy_v == doctest::Approx(energy_s).epsilon(1e-13));
            CHECK(clipped_v == doctest::Approx(clipped_s).epsilon(1e-13));
            // element-wise kernels share the exact operation sequence
            CHECK(ga_v == ga_s);
            CHECK(gb_v == gb_s);
            CHECK(scan_v.index == scan_s.index);
            CHECK(scan_v.gain == scan_s.gain);
            CHECK(scan_v.delta == scan_s.delta);
            CHECK(scan_v.eta == scan_s.eta);
        }
    }
}

TEST_CASE("gain scan picks the first of equal gains") {
    BackendGuard guard;
    // identical coordinates produce identical gains; the scan must return 0
    std::size_t n = 9;
    std::vector<double> ga(n, 1.5), gb(n, -1.5), alpha(n, 0.0), beta(n, 0.0);
    for (auto lane : {simd::Backend::Scalar, simd::Backend::Avx2, simd::Backend::Neon}) {
        if (!simd::supported(lane)) continue;
        simd::set_backend(lane);
        auto hit = simd::best_gain_scan(ga.data(), gb.data(), alpha.data(), beta.data(), 0, n, 3.0,
                                        3.0);
        CHECK(hit.index == 0);
        CHECK(hit.gain > 0.0);
    }
}

TEST_CASE("gain scan over a subrange") {
    BackendGuard guard;
    simd::set_backend(simd::Backend::Scalar);
    std::vector<double> ga{0.1, 5.0, 0.2, 0.3, 4.0, 0.1};
    std::vector<double> gb(6, 0.0), alpha(6, 0.0), beta(6, 0.0);
    auto hit = simd::best_gain_scan(ga.data(), gb.data(), alpha.data(), beta.data(), 2, 6, 3.0,
                                    3.0);
    CHECK(hit.index == 4);
}

TEST_SUITE_END();
