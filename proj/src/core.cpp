#include "ersvm/core.hpp"

#include <cmath>
#include <stdexcept>

namespace ersvm {

void HyperParams::validate() const {
    // tau on the boundary would make the update coefficients b1 or b2 undefined
    if (!(tau > 0.0) || !(tau < 1.0)) throw std::invalid_argument("tau must lie strictly in (0,1)");
    if (!(cost > 0.0) || !std::isfinite(cost)) throw std::invalid_argument("cost must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be positive");
    if (!(clip_m > 0.0) || !std::isfinite(clip_m))
        throw std::invalid_argument("clip bound must be positive");
    if (knn < 1) throw std::invalid_argument("neighbor count must be at least 1");
}

double cost_from_lambda(double lambda, std::size_t n) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be positive");
    if (n == 0) throw std::invalid_argument("empty training set");
    return 1.0 / (2.0 * static_cast<double>(n) * lambda);
}

double lambda_from_cost(double cost, std::size_t n) {
    if (!(cost > 0.0) || !std::isfinite(cost)) throw std::invalid_argument("cost must be positive");
    if (n == 0) throw std::invalid_argument("empty training set");
    return 1.0 / (2.0 * static_cast<double>(n) * cost);
}

TrainingSet::TrainingSet(std::vector<double> features_row_major, std::vector<double> labels,
                         std::size_t d)
    : features_(std::move(features_row_major)), labels_(std::move(labels)), d_(d) {
    if (labels_.empty()) throw std::invalid_argument("training set needs at least one sample");
    if (d_ == 0) throw std::invalid_argument("training set needs at least one feature");
    if (features_.size() != labels_.size() * d_)
        throw std::invalid_argument("feature matrix shape does not match labels");
    for (double v : features_)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature entry");
    for (double v : labels_)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite label");
}

ScalingTransform ScalingTransform::identity(std::size_t d) {
    ScalingTransform t;
    t.offset.assign(d + 1, 0.0);
    t.scale.assign(d + 1, 1.0);
    return t;
}

double als_loss(double t, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0)) throw std::invalid_argument("tau must lie strictly in (0,1)");
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite residual");
    return t >= 0.0 ? tau * t * t : (1.0 - tau) * t * t;
}

double als_risk(std::span<const double> residuals, double tau) {
    if (residuals.empty()) throw std::invalid_argument("empty residual vector");
    double acc = 0.0;
    for (double t : residuals) acc += als_loss(t, tau);
    return acc / static_cast<double>(residuals.size());
}

namespace {

// d/de of the empirical ALS risk around e, up to a factor of -2
double expectile_balance(std::span<const double> values, double tau, double e) {
    double up = 0.0, down = 0.0;
    for (double y : values) {
        if (y > e)
            up += y - e;
        else if (y < e)
            down += e - y;
    }
    return tau * up - (1.0 - tau) * down;
}

} // namespace

double sample_expectile(std::span<const double> values, double tau) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    if (!(tau > 0.0) || !(tau < 1.0)) throw std::invalid_argument("tau must lie strictly in (0,1)");
    double lo = values[0], hi = values[0];
    for (double y : values) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (lo == hi) return lo;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (expectile_balance(values, tau, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace ersvm
