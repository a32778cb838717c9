#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ersvm {

// Working-set selection strategy. Scan1D is the full single-coordinate scan;
// Wss1 pairs the best directions of two index halves; Wss2 pairs the best
// direction with its best k-nearest-neighbor partner.
enum class Wss { Scan1D, Wss1, Wss2 };

struct HyperParams {
    double tau = 0.5;       // expectile level, strictly inside (0, 1)
    double cost = 1.0;      // C > 0; lambda converts via C = 1 / (2 n lambda)
    double gamma = 1.0;     // kernel width parameter, > 0
    double epsilon = 1e-3;  // stopping tolerance, > 0
    double clip_m = 1.0;    // clipping bound M, > 0
    bool use_clipped_gap = false;
    Wss wss = Wss::Wss2;
    std::size_t knn = 15;
    std::uint64_t max_iter = 10'000'000;
    std::uint64_t validate_every = 0; // from-scratch consistency checks when > 0
    bool record_trace = false;        // keep a per-update trace in the train result

    void validate() const; // throws std::invalid_argument
};

double cost_from_lambda(double lambda, std::size_t n);
double lambda_from_cost(double cost, std::size_t n);

// Dense training set: row-major features with one label per row. Entries must
// be finite; scaling into [-1, 1] is the experiment pipeline's job.
class TrainingSet {
public:
    TrainingSet(std::vector<double> features_row_major, std::vector<double> labels, std::size_t d);

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return d_; }
    const double* point(std::size_t i) const { return features_.data() + i * d_; }
    double label(std::size_t i) const { return labels_[i]; }
    std::span<const double> labels() const { return labels_; }
    std::span<const double> features() const { return features_; }

private:
    std::vector<double> features_;
    std::vector<double> labels_;
    std::size_t d_;
};

// Componentwise affine map used at training time; entry d is the label.
// scaled = (raw - offset) / scale, with scale 1 recorded for constant columns.
struct ScalingTransform {
    std::vector<double> offset; // d + 1 entries
    std::vector<double> scale;  // d + 1 entries, all nonzero

    static ScalingTransform identity(std::size_t d);
    std::size_t dim() const { return offset.size() - 1; }
    double scale_feature(std::size_t j, double v) const { return (v - offset[j]) / scale[j]; }
    double scale_label(double v) const { return (v - offset.back()) / scale.back(); }
    double unscale_label(double v) const { return v * scale.back() + offset.back(); }
};

// Asymmetric least squares loss: tau * t^2 for t >= 0, (1 - tau) * t^2 below.
double als_loss(double t, double tau);

// Mean ALS loss over a residual vector.
double als_risk(std::span<const double> residuals, double tau);

// The constant minimizing the empirical ALS risk of a sample, found by
// bisection on the first-order condition to 1e-12. Equals the mean at
// tau = 0.5. Mostly a test oracle.
double sample_expectile(std::span<const double> values, double tau);

} // namespace ersvm
