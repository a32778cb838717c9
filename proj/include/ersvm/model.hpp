#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ersvm/core.hpp"
#include "ersvm/dual_state.hpp"

namespace ersvm {

class ModelIoError : public std::runtime_error {
public:
    enum class Kind { Version, Truncated, Malformed, Structure };
    ModelIoError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Trained predictor: the support points with nonzero dual difference
// u = alpha - beta, the kernel and loss parameters, and the componentwise
// scaling used at training time, so raw inputs predict raw labels.
class Model {
public:
    Model(std::vector<double> support_row_major, std::vector<double> coefficients, std::size_t d,
          double tau, double cost, double gamma, double clip_m, ScalingTransform scaling);

    // Coefficients below 1e-12 in magnitude are dropped; they sit under the
    // serialization precision.
    static Model from_state(const DualState& state, const ScalingTransform& scaling);

    double predict(std::span<const double> x) const;
    double predict_clipped(std::span<const double> x) const;

    // Kernel expansion on an already scaled point, before label unscaling.
    double predict_scaled(std::span<const double> xs) const;
    double predict_scaled_clipped(std::span<const double> xs) const;

    std::size_t support_size() const { return coefficients_.size(); }
    std::size_t dim() const { return d_; }
    double tau() const { return tau_; }
    double cost() const { return cost_; }
    double gamma() const { return gamma_; }
    double clip_m() const { return clip_m_; }
    const ScalingTransform& scaling() const { return scaling_; }
    std::span<const double> coefficients() const { return coefficients_; }

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static Model load(std::istream& in);
    static Model load(const std::string& path);

private:
    std::vector<double> support_; // m x d row-major, scaled space
    std::vector<double> coefficients_;
    std::size_t d_;
    double tau_, cost_, gamma_, clip_m_;
    ScalingTransform scaling_;
};

} // namespace ersvm
