#include "ersvm/twodim.hpp"

#include <algorithm>
#include <stdexcept>

#include "ersvm/simd.hpp"

namespace ersvm {

PairCoeffs pair_coeffs(DualState& state, std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("pair needs two distinct coordinates");
    if (i >= state.size() || j >= state.size())
        throw std::out_of_range("pair index out of range");
    PairCoeffs pc;
    pc.i = i;
    pc.j = j;
    pc.coeffs = b_coefficients(state.params().cost, state.params().tau);
    pc.k = state.cache().entry(i, j);
    auto a = state.alpha();
    auto b = state.beta();
    pc.c_i = state.grad_alpha()[i] + pc.coeffs.b1 * a[i] - b[i] + (a[j] - b[j]) * pc.k;
    pc.c_j = state.grad_alpha()[j] + pc.coeffs.b1 * a[j] - b[j] + (a[i] - b[i]) * pc.k;
    return pc;
}

std::array<double, 4> t_values(const PairCoeffs& pc) {
    const double b1 = pc.coeffs.b1, b2 = pc.coeffs.b2, k = pc.k;
    return {k * pc.c_j - b2 * pc.c_i, k * pc.c_i - b2 * pc.c_j, b1 * pc.c_i - k * pc.c_j,
            b1 * pc.c_j - k * pc.c_i};
}

double det_m(double b1, double b2, double k) {
    const double k2 = k * k;
    return b1 * b1 * (b2 * b2 - k2) - 2.0 * b1 * (b2 * k2 + b2 - 2.0 * k2) -
           (b2 - 2.0) * (b2 - 2.0) * k2 + 1.0;
}

Solution2D solve_2d(const PairCoeffs& pc) {
    Solution2D s;
    if (pc.c_i == 0.0 && pc.c_j == 0.0) return s;

    const auto [t1, t2, t3, t4] = t_values(pc);
    const double b1 = pc.coeffs.b1, b2 = pc.coeffs.b2, k2 = pc.k * pc.k;
    if (t1 >= 0.0 && t2 >= 0.0) {
        const double inv = 1.0 / (b2 * b2 - k2);
        s.beta_i = t1 * inv;
        s.beta_j = t2 * inv;
        s.case_id = 1;
    } else if (t3 >= 0.0 && t4 >= 0.0) {
        const double inv = 1.0 / (b1 * b1 - k2);
        s.alpha_i = t3 * inv;
        s.alpha_j = t4 * inv;
        s.case_id = 2;
    } else if (t2 <= 0.0 && t3 <= 0.0) {
        const double inv = 1.0 / (k2 - b1 * b2); // negative
        s.beta_i = t3 * inv;
        s.alpha_j = t2 * inv;
        s.case_id = 3;
    } else if (t1 <= 0.0 && t4 <= 0.0) {
        const double inv = 1.0 / (k2 - b1 * b2);
        s.alpha_i = t1 * inv;
        s.beta_j = t4 * inv;
        s.case_id = 4;
    } else {
        // unreachable for |k| <= 1 < b1, b2: one of the four sign patterns holds
        throw std::logic_error("no feasible boundary case matched");
    }
    return s;
}

double gain_2d(double delta_i, double eta_i, double grad_ai, double grad_bi, double delta_j,
               double eta_j, double grad_aj, double grad_bj, double k, const BCoeffs& coeffs) {
    return gain_1d(delta_i, eta_i, grad_ai, grad_bi, coeffs) +
           gain_1d(delta_j, eta_j, grad_aj, grad_bj, coeffs) -
           (delta_i - eta_i) * (delta_j - eta_j) * k;
}

Step2D pair_step(DualState& state, std::size_t i, std::size_t j) {
    const PairCoeffs pc = pair_coeffs(state, i, j);
    const Solution2D sol = solve_2d(pc);
    Step2D step;
    step.i = i;
    step.j = j;
    step.case_id = sol.case_id;
    step.delta_i = sol.alpha_i - state.alpha()[i];
    step.eta_i = sol.beta_i - state.beta()[i];
    step.delta_j = sol.alpha_j - state.alpha()[j];
    step.eta_j = sol.beta_j - state.beta()[j];
    step.gain = gain_2d(step.delta_i, step.eta_i, state.grad_alpha()[i], state.grad_beta()[i],
                        step.delta_j, step.eta_j, state.grad_alpha()[j], state.grad_beta()[j],
                        pc.k, pc.coeffs);
    return step;
}

namespace {

// (min, max) ordering for the "pair containing the lowest index" tie rule
bool pair_precedes(std::size_t ai, std::size_t aj, std::size_t bi, std::size_t bj) {
    const auto a = std::minmax(ai, aj);
    const auto b = std::minmax(bi, bj);
    return a < b;
}

} // namespace

Step2D select_wss1(DualState& state, const PairMemory& memory) {
    const std::size_t n = state.size();
    if (n < 2) throw std::invalid_argument("pair selection needs at least two samples");
    const BCoeffs k = b_coefficients(state.params().cost, state.params().tau);
    const std::size_t half = (n + 1) / 2;
    const auto scan_i =
        simd::best_gain_scan(state.grad_alpha().data(), state.grad_beta().data(),
                             state.alpha().data(), state.beta().data(), 0, half, k.b1, k.b2);
    const auto scan_j =
        simd::best_gain_scan(state.grad_alpha().data(), state.grad_beta().data(),
                             state.alpha().data(), state.beta().data(), half, n, k.b1, k.b2);

    if (!memory.valid) return pair_step(state, scan_i.index, scan_j.index);

    const std::size_t is[2] = {scan_i.index, memory.i};
    const std::size_t js[2] = {scan_j.index, memory.j};
    bool have = false;
    Step2D best;
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            const std::size_t ci = is[a], cj = js[b];
            if (ci == cj) continue;
            if (have && ((best.i == ci && best.j == cj) || (best.i == cj && best.j == ci)))
                continue;
            Step2D cand = pair_step(state, ci, cj);
            if (!have || cand.gain > best.gain ||
                (cand.gain == best.gain && pair_precedes(ci, cj, best.i, best.j))) {
                best = cand;
                have = true;
            }
        }
    }
    if (!have) return pair_step(state, scan_i.index, scan_j.index);
    return best;
}

Step2D select_wss2(DualState& state, const KnnIndex& knn, const PairMemory& memory) {
    const Step2D seed = select_wss1(state, memory);

    // fix the seed member whose own exact 1D step gains more; fixing the
    // weaker one can pin the search to an exhausted coordinate whose whole
    // neighborhood is exhausted too, and the solver would stop moving while
    // the other half still carries the gap
    const BCoeffs k = b_coefficients(state.params().cost, state.params().tau);
    auto own_gain = [&](std::size_t i) {
        auto [ap, bp] = solve_1d(c_value(state, i), k);
        return gain_1d(ap - state.alpha()[i], bp - state.beta()[i], state.grad_alpha()[i],
                       state.grad_beta()[i], k);
    };
    const std::size_t pivot = own_gain(seed.j) > own_gain(seed.i) ? seed.j : seed.i;

    const auto neighbors = knn.neighbors(pivot);
    if (neighbors.empty()) return seed;
    bool have = false;
    Step2D best;
    for (std::uint32_t j : neighbors) {
        Step2D cand = pair_step(state, pivot, j);
        if (!have || cand.gain > best.gain || (cand.gain == best.gain && j < best.j)) {
            best = cand;
            have = true;
        }
    }
    return best;
}

TrainResult train_2d(DualState& state, const KnnIndex* knn) {
    const HyperParams& p = state.params();
    if (state.size() < 2) throw std::invalid_argument("2D solver needs at least two samples");
    if (p.wss == Wss::Scan1D)
        throw std::invalid_argument("2D solver requires a pair selection strategy");

    KnnIndex local;
    if (p.wss == Wss::Wss2 && knn == nullptr) {
        local = build_knn(state.data(), p.knn);
        knn = &local;
    }

    TrainResult result;
    PairMemory memory;
    GapReport gap = state.duality_gap(p.use_clipped_gap);
    while (!gap.stop()) {
        if (result.iterations >= p.max_iter) {
            result.status = TrainStatus::IterationCap;
            break;
        }
        Step2D step = p.wss == Wss::Wss1 ? select_wss1(state, memory)
                                         : select_wss2(state, *knn, memory);
        if (!(step.gain > 0.0)) {
            result.status = TrainStatus::Stalled;
            break;
        }
        state.apply_update_2d(step.i, step.j, step.delta_i, step.eta_i, step.delta_j, step.eta_j);
        memory = {true, step.i, step.j};
        ++result.iterations;
        gap = state.duality_gap(p.use_clipped_gap);
        if (p.record_trace)
            result.trace.push_back({static_cast<std::uint32_t>(step.i),
                                    static_cast<std::uint32_t>(step.j), step.gain, gap.s});
        if (p.validate_every > 0 && result.iterations % p.validate_every == 0)
            state.validate_consistency();
    }
    result.final_gap = gap;
    return result;
}

} // namespace ersvm
