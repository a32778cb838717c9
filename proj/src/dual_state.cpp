#include "ersvm/dual_state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ersvm/simd.hpp"

namespace ersvm {

namespace {

constexpr double kSnapTol = 1e-14;

double snap_nonnegative(double v, const char* what) {
    if (v >= kSnapTol) return v;
    if (v > -kSnapTol) return 0.0;
    throw std::invalid_argument(std::string("infeasible dual step: negative ") + what);
}

bool close(double a, double b, double tol) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

} // namespace

void DualState::refresh_derived() {
    inv2ct_ = 1.0 / (2.0 * params_.cost * params_.tau);
    inv2cmt_ = 1.0 / (2.0 * params_.cost * (1.0 - params_.tau));
}

DualState DualState::cold_start(const TrainingSet& data, const HyperParams& params,
                                KernelCache& cache) {
    params.validate();
    if (cache.size() != data.size())
        throw std::invalid_argument("kernel cache does not match the training set");
    DualState s;
    s.data_ = &data;
    s.cache_ = &cache;
    s.params_ = params;
    s.refresh_derived();
    const std::size_t n = data.size();
    s.alpha_.assign(n, 0.0);
    s.beta_.assign(n, 0.0);
    s.ga_.assign(data.labels().begin(), data.labels().end());
    s.gb_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.gb_[i] = -s.ga_[i];
    s.t_ = 0.0;
    return s;
}

DualState DualState::warm_start(const DualState& prev, double c_old, double c_new) {
    if (!(c_old > 0.0) || !(c_new > 0.0) || !std::isfinite(c_old) || !std::isfinite(c_new))
        throw std::invalid_argument("warm start costs must be positive");
    if (prev.alpha_.size() != prev.data_->size())
        throw std::invalid_argument("warm start state does not match its training set");
    DualState s = prev;
    s.params_.cost = c_new;
    s.refresh_derived();

    const double diff = 1.0 / c_old - 1.0 / c_new;
    if (diff != 0.0) {
        const double at = diff / (2.0 * s.params_.tau);
        const double bt = diff / (2.0 * (1.0 - s.params_.tau));
        double quad = 0.0;
        for (std::size_t i = 0; i < s.alpha_.size(); ++i) {
            s.ga_[i] += at * s.alpha_[i];
            s.gb_[i] += bt * s.beta_[i];
            quad += s.alpha_[i] * s.alpha_[i] / s.params_.tau +
                    s.beta_[i] * s.beta_[i] / (1.0 - s.params_.tau);
        }
        s.t_ -= 0.25 * diff * quad;
    }
    return s;
}

double DualState::fitted(std::size_t i) const {
    return data_->label(i) - ga_[i] - alpha_[i] * inv2ct_;
}

// Exact change of T = <u, Ku> - <u, y> + |alpha|^2/(4 C tau) + |beta|^2/(4 C (1-tau))
// under alpha_i += delta, beta_i += eta, evaluated at the pre-update state.
double DualState::t_decrement(std::size_t i, double delta, double eta) const {
    const double step = delta - eta;
    const double f = fitted(i);
    const double y = data_->label(i);
    double dt = 2.0 * step * f + step * step - step * y;
    dt += (2.0 * delta * alpha_[i] + delta * delta) * (0.5 * inv2ct_);
    dt += (2.0 * eta * beta_[i] + eta * eta) * (0.5 * inv2cmt_);
    return -dt;
}

void DualState::apply_update_1d(std::size_t i, double delta, double eta) {
    if (i >= alpha_.size()) throw std::out_of_range("update index out of range");
    const double na = snap_nonnegative(alpha_[i] + delta, "alpha");
    const double nb = snap_nonnegative(beta_[i] + eta, "beta");

    t_ -= t_decrement(i, delta, eta);

    auto row = cache_->row(i);
    simd::gradient_step(ga_.data(), gb_.data(), row.data(), alpha_.size(), delta - eta);
    ga_[i] -= delta * inv2ct_;
    gb_[i] -= eta * inv2cmt_;

    alpha_[i] = na;
    beta_[i] = nb;
    ++iters_;
}

void DualState::apply_update_2d(std::size_t i, std::size_t j, double delta_i, double eta_i,
                                double delta_j, double eta_j) {
    if (i == j) throw std::invalid_argument("2D update needs two distinct coordinates");
    if (i >= alpha_.size() || j >= alpha_.size())
        throw std::out_of_range("update index out of range");
    const double nai = snap_nonnegative(alpha_[i] + delta_i, "alpha");
    const double nbi = snap_nonnegative(beta_[i] + eta_i, "beta");
    const double naj = snap_nonnegative(alpha_[j] + delta_j, "alpha");
    const double nbj = snap_nonnegative(beta_[j] + eta_j, "beta");

    const std::size_t n = alpha_.size();
    auto row_i = cache_->row(i);
    const double k = row_i[j];

    const double ui = t_decrement(i, delta_i, eta_i);
    const double uj = t_decrement(j, delta_j, eta_j);
    t_ -= ui + uj - 2.0 * (delta_i - eta_i) * (delta_j - eta_j) * k;

    simd::gradient_step(ga_.data(), gb_.data(), row_i.data(), n, delta_i - eta_i);
    auto row_j = cache_->row(j);
    simd::gradient_step(ga_.data(), gb_.data(), row_j.data(), n, delta_j - eta_j);
    ga_[i] -= delta_i * inv2ct_;
    gb_[i] -= eta_i * inv2cmt_;
    ga_[j] -= delta_j * inv2ct_;
    gb_[j] -= eta_j * inv2cmt_;

    alpha_[i] = nai;
    beta_[i] = nbi;
    alpha_[j] = naj;
    beta_[j] = nbj;
    ++iters_;
}

std::pair<double, double> DualState::slacks(std::size_t i, bool clipped) const {
    if (i >= alpha_.size()) throw std::out_of_range("slack index out of range");
    double r = ga_[i] + alpha_[i] * inv2ct_; // y_i - f(x_i)
    if (clipped) {
        const double m = params_.clip_m;
        double f = data_->label(i) - r;
        double fc = f > m ? m : (f < -m ? -m : f);
        r = data_->label(i) - fc;
    }
    return {r > 0.0 ? r : 0.0, r < 0.0 ? -r : 0.0};
}

GapReport DualState::duality_gap(bool clipped) const {
    const std::size_t n = alpha_.size();
    GapReport g;
    g.clipped = clipped;
    g.t_part = t_;
    g.e_part = clipped
                   ? simd::slack_energy_clipped(ga_.data(), alpha_.data(), data_->labels().data(),
                                                n, inv2ct_, params_.tau, params_.clip_m)
                   : simd::slack_energy(ga_.data(), alpha_.data(), n, inv2ct_, params_.tau);
    g.s = t_ + params_.cost * g.e_part;
    // epsilon / (2 lambda) with lambda = 1 / (2 n C)
    g.threshold = params_.epsilon * static_cast<double>(n) * params_.cost;
    return g;
}

double DualState::dual_objective() const {
    const std::size_t n = alpha_.size();
    double lin = 0.0, quad = 0.0, reg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = alpha_[i] - beta_[i];
        lin += u * data_->label(i);
        reg += alpha_[i] * alpha_[i] * (0.5 * inv2ct_) + beta_[i] * beta_[i] * (0.5 * inv2cmt_);
        if (u != 0.0) {
            auto row = cache_->row(i);
            double f = 0.0;
            for (std::size_t l = 0; l < n; ++l) f += row[l] * (alpha_[l] - beta_[l]);
            quad += u * f;
        }
    }
    return lin - 0.5 * quad - reg;
}

void DualState::validate_consistency(double tol) const {
    const std::size_t n = alpha_.size();
    std::vector<double> fit(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = alpha_[i] - beta_[i];
        if (u == 0.0) continue;
        auto row = cache_->row(i);
        for (std::size_t l = 0; l < n; ++l) fit[l] += u * row[l];
    }

    double t_ref = 0.0, e_ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = data_->label(i);
        const double u = alpha_[i] - beta_[i];
        const double ga_ref = y - fit[i] - alpha_[i] * inv2ct_;
        const double gb_ref = -y + fit[i] - beta_[i] * inv2cmt_;
        if (!close(ga_[i], ga_ref, tol) || !close(gb_[i], gb_ref, tol))
            throw std::logic_error("incremental gradients drifted from scratch values");
        const double lhs = ga_[i] + gb_[i];
        const double rhs = -alpha_[i] * inv2ct_ - beta_[i] * inv2cmt_;
        if (!close(lhs, rhs, tol))
            throw std::logic_error("gradient sum identity violated");
        t_ref += u * fit[i] - u * y + alpha_[i] * alpha_[i] * (0.5 * inv2ct_) +
                 beta_[i] * beta_[i] * (0.5 * inv2cmt_);
        double r = y - fit[i];
        e_ref += r >= 0.0 ? params_.tau * r * r : (1.0 - params_.tau) * r * r;
    }
    if (!close(t_, t_ref, tol))
        throw std::logic_error("incremental T drifted from scratch value");
    const double e_inc =
        simd::slack_energy(ga_.data(), alpha_.data(), n, inv2ct_, params_.tau);
    if (!close(e_inc, e_ref, tol))
        throw std::logic_error("slack energy disagrees with scratch value");
}

} // namespace ersvm
