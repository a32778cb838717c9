#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ersvm/core.hpp"
#include "ersvm/kernel.hpp"
#include "ersvm/model.hpp"
#include "ersvm/onedim.hpp"

namespace ersvm {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawDataset {
    std::vector<double> features; // row-major
    std::vector<double> labels;
    std::size_t n = 0;
    std::size_t d = 0;
};

enum class DataFormat { Csv, Sparse };

// CSV with an optional header (any row whose cells do not all parse as
// numbers is treated as one); label_col picks the label column, -1 the last.
RawDataset ingest_csv(std::istream& in, int label_col = -1);
// Whitespace-separated sparse rows "label idx:val ...", indices 1-based.
RawDataset ingest_sparse(std::istream& in);
RawDataset ingest(const std::string& path, DataFormat format, int label_col = -1);

// Componentwise affine map of every feature column and the label onto
// [-1, 1]; constant columns go to 0 and record scale 1.
std::pair<TrainingSet, ScalingTransform> scale_to_unit_box(const RawDataset& raw);

// Seeded uniform shuffle, then prefix split with round(fraction * n) rows.
std::pair<RawDataset, RawDataset> split(const RawDataset& data, double train_fraction,
                                        std::uint64_t seed);

struct GridSpec {
    std::vector<double> lambdas; // strictly descending
    std::vector<double> gammas;  // strictly ascending
};

// Geometric grids over [0.001 / n, 1] for lambda (descending, so the cost
// sequence ascends for warm starting) and [0.1 * n^(-1/d), 0.2] for gamma.
GridSpec default_grid(std::size_t n, std::size_t d, std::size_t n_lambda = 10,
                      std::size_t n_gamma = 10);

enum class CachePolicy { Auto, Full, RowLru };

struct SolverOptions {
    double epsilon = 1e-3;
    double clip_m = 1.0;
    bool use_clipped_gap = false;
    bool solver_1d = false; // single-coordinate solver instead of pairs
    Wss wss = Wss::Wss2;
    std::size_t knn = 15;
    std::uint64_t max_iter = 10'000'000;
    bool warm_start = true;
    std::size_t threads = 1;
    CachePolicy cache = CachePolicy::Auto;
    std::size_t cache_budget = 1024;
    std::uint64_t validate_every = 0;

    HyperParams make_params(double tau, double cost, double gamma) const;
};

// Fold-training conversions against the nominal training size (k-1) n / k:
// the kernel width becomes (k-1) n gamma / k and the cost k / (2 (k-1) n lambda).
double cv_gamma_eff(std::size_t folds, std::size_t n, double gamma);
double cv_cost(std::size_t folds, std::size_t n, double lambda);

struct CvCell {
    double lambda = 0.0;
    double gamma = 0.0;
    double mean_risk = 0.0;
    std::uint64_t iterations = 0;
    double seconds = 0.0;
    bool converged = true;
};

struct CvReport {
    std::vector<CvCell> cells; // lambda descending, gamma ascending within
    std::size_t best_index = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    const CvCell& best() const { return cells[best_index]; }
};

// k-fold cross validation over the grid. Folds are contiguous blocks of a
// seeded permutation. Fold training converts the cell to the internal pair
// gamma_eff = (k-1) n gamma / k and C = k / (2 (k-1) n lambda); within a
// fixed gamma the lambdas run in descending order with warm starts. The best
// cell minimizes the mean validation ALS risk, ties preferring the larger
// lambda and then the smaller gamma.
CvReport cv_select(const TrainingSet& train, double tau, const GridSpec& grid, std::size_t folds,
                   std::uint64_t seed, const SolverOptions& opts);

// Trains one grid cell on the whole scaled set, applying the same size
// calibration at m = n: cost 1 / (2 n lambda) and width n * gamma.
Model fit_grid_cell(const TrainingSet& train, double tau, double lambda, double gamma,
                    const SolverOptions& opts, const ScalingTransform& scaling,
                    TrainResult* result = nullptr);

// Trains with the hyperparameters exactly as given (no size calibration).
Model fit_direct(const TrainingSet& train, double tau, double cost, double gamma,
                 const SolverOptions& opts, const ScalingTransform& scaling,
                 TrainResult* result = nullptr);

// Mean ALS risk of the scaled-space residuals on a raw test set.
double evaluate(const Model& model, const RawDataset& test, double tau, bool clipped = false);

struct CurveTable {
    std::vector<double> taus;
    std::vector<double> xs;                   // designated-feature grid
    std::vector<std::vector<double>> curves;  // one column per tau, raw label scale
};

// One model per tau at fixed (cost, gamma), predicted on an even grid of the
// designated feature; remaining features sit at their midpoint. sqrt_x
// replaces the feature by its square root before anything else.
CurveTable expectile_curves(const RawDataset& data, const std::vector<double>& taus, double cost,
                            double gamma, const SolverOptions& opts,
                            std::optional<std::size_t> feature = std::nullopt,
                            std::size_t grid_points = 200, bool sqrt_x = false);

struct BenchConfig {
    double tau = 0.5;
    bool solver_1d = false;
    Wss wss = Wss::Wss2;
    bool warm_start = true;
    bool use_clipped_gap = false;
    std::size_t knn = 15;
};

struct BenchRow {
    BenchConfig config;
    bool total = false; // aggregate row over the whole grid
    double lambda = 0.0;
    double gamma = 0.0;
    std::uint64_t iterations = 0;
    double seconds = 0.0;
    bool converged = true;
};

// Grid-search cost measurement: trains every cell (size-calibrated at the
// full training size) for each configuration and reports per-cell and total
// iterations and wall time.
std::vector<BenchRow> benchmark(const TrainingSet& train, const GridSpec& grid,
                                const std::vector<BenchConfig>& configs,
                                const SolverOptions& base);

// Tab-separated emission, 17 significant digits, one header row.
void write_cv_table(std::ostream& out, const CvReport& report, char delim = '\t');
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows, char delim = '\t');
void write_curve_table(std::ostream& out, const CurveTable& table, char delim = '\t');

} // namespace ersvm
