#include "ersvm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "ersvm/rng.hpp"
#include "ersvm/simd.hpp"
#include "ersvm/twodim.hpp"

namespace ersvm {

namespace {

bool parse_num(const std::string& tok, double* out) {
    if (tok.empty()) return false;
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size() || !std::isfinite(v)) return false;
        *out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_cells(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RawDataset ingest_csv(std::istream& in, int label_col) {
    RawDataset out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    bool saw_row = false;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_cells(line, ',');
        row.assign(cells.size(), 0.0);
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_num(cells[c], &row[c])) {
                numeric = false;
                bad_col = c;
                break;
            }
        }
        if (!numeric) {
            if (!saw_row) continue; // header row
            throw DataError("line " + std::to_string(line_no) + " column " +
                            std::to_string(bad_col + 1) + ": not a number");
        }
        if (!saw_row) {
            cols = cells.size();
            if (cols < 2) throw DataError("need at least one feature column and a label");
            saw_row = true;
        } else if (cells.size() != cols) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " columns, got " +
                            std::to_string(cells.size()));
        }
        std::size_t lc = label_col < 0 ? cols - 1 : static_cast<std::size_t>(label_col);
        if (lc >= cols) throw DataError("label column out of range");
        out.labels.push_back(row[lc]);
        for (std::size_t c = 0; c < cols; ++c)
            if (c != lc) out.features.push_back(row[c]);
    }
    if (!saw_row) throw DataError("no data rows");
    out.n = out.labels.size();
    out.d = cols - 1;
    return out;
}

RawDataset ingest_sparse(std::istream& in) {
    struct SparseRow {
        double label;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<SparseRow> rows;
    std::size_t d = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        SparseRow r;
        if (!parse_num(tok, &r.label))
            throw DataError("line " + std::to_string(line_no) + " column 1: bad label");
        std::size_t col = 1;
        while (ss >> tok) {
            ++col;
            auto sep = tok.find(':');
            double idx_raw = 0.0, val = 0.0;
            if (sep == std::string::npos || !parse_num(tok.substr(0, sep), &idx_raw) ||
                !parse_num(tok.substr(sep + 1), &val) || idx_raw < 1.0 ||
                idx_raw != std::floor(idx_raw))
                throw DataError("line " + std::to_string(line_no) + " column " +
                                std::to_string(col) + ": expected index:value");
            auto idx = static_cast<std::size_t>(idx_raw);
            d = std::max(d, idx);
            r.entries.emplace_back(idx - 1, val);
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw DataError("no data rows");
    if (d == 0) throw DataError("no feature indices present");
    RawDataset out;
    out.n = rows.size();
    out.d = d;
    out.features.assign(out.n * d, 0.0);
    out.labels.reserve(out.n);
    for (std::size_t i = 0; i < out.n; ++i) {
        out.labels.push_back(rows[i].label);
        for (auto [j, v] : rows[i].entries) out.features[i * d + j] = v;
    }
    return out;
}

RawDataset ingest(const std::string& path, DataFormat format, int label_col) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return format == DataFormat::Csv ? ingest_csv(in, label_col) : ingest_sparse(in);
}

std::pair<TrainingSet, ScalingTransform> scale_to_unit_box(const RawDataset& raw) {
    if (raw.n == 0) throw std::invalid_argument("empty dataset");
    const std::size_t d = raw.d;
    ScalingTransform tf;
    tf.offset.resize(d + 1);
    tf.scale.resize(d + 1);
    for (std::size_t j = 0; j <= d; ++j) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < raw.n; ++i) {
            double v = j < d ? raw.features[i * d + j] : raw.labels[i];
            if (i == 0) {
                lo = hi = v;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (lo == hi) {
            tf.offset[j] = lo;
            tf.scale[j] = 1.0;
        } else {
            tf.offset[j] = 0.5 * (lo + hi);
            tf.scale[j] = 0.5 * (hi - lo);
        }
    }
    std::vector<double> feats(raw.n * d);
    std::vector<double> labels(raw.n);
    for (std::size_t i = 0; i < raw.n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            feats[i * d + j] = tf.scale_feature(j, raw.features[i * d + j]);
        labels[i] = tf.scale_label(raw.labels[i]);
    }
    return {TrainingSet(std::move(feats), std::move(labels), d), std::move(tf)};
}

std::pair<RawDataset, RawDataset> split(const RawDataset& data, double train_fraction,
                                        std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie strictly in (0,1)");
    const std::size_t n = data.n;
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("split would leave one side empty");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    auto take = [&](std::size_t from, std::size_t to) {
        RawDataset out;
        out.n = to - from;
        out.d = data.d;
        out.features.reserve(out.n * data.d);
        out.labels.reserve(out.n);
        for (std::size_t r = from; r < to; ++r) {
            std::size_t i = perm[r];
            out.labels.push_back(data.labels[i]);
            const double* f = data.features.data() + i * data.d;
            out.features.insert(out.features.end(), f, f + data.d);
        }
        return out;
    };
    return {take(0, n_train), take(n_train, n)};
}

namespace {

std::vector<double> geometric(double from, double to, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = std::sqrt(from * to);
        return v;
    }
    const double lf = std::log(from), lt = std::log(to);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = std::exp(lf + (lt - lf) * static_cast<double>(i) / static_cast<double>(count - 1));
    v.front() = from;
    v.back() = to;
    return v;
}

} // namespace

GridSpec default_grid(std::size_t n, std::size_t d, std::size_t n_lambda, std::size_t n_gamma) {
    if (n == 0 || d == 0) throw std::invalid_argument("grid needs n >= 1 and d >= 1");
    if (n_lambda == 0 || n_gamma == 0) throw std::invalid_argument("grid sizes must be positive");
    GridSpec g;
    const double nn = static_cast<double>(n);
    g.lambdas = geometric(1.0, 0.001 / nn, n_lambda);
    g.gammas = geometric(0.1 * std::pow(nn, -1.0 / static_cast<double>(d)), 0.2, n_gamma);
    return g;
}

HyperParams SolverOptions::make_params(double tau, double cost, double gamma) const {
    HyperParams p;
    p.tau = tau;
    p.cost = cost;
    p.gamma = gamma;
    p.epsilon = epsilon;
    p.clip_m = clip_m;
    p.use_clipped_gap = use_clipped_gap;
    p.wss = solver_1d ? Wss::Scan1D : wss;
    p.knn = knn;
    p.max_iter = max_iter;
    p.validate_every = validate_every;
    p.validate();
    return p;
}

namespace {

KernelCache make_cache(const TrainingSet& data, double gamma, const SolverOptions& o) {
    CacheMode m = o.cache == CachePolicy::Auto
                      ? KernelCache::default_mode(data.size())
                      : (o.cache == CachePolicy::Full ? CacheMode::FullMatrix : CacheMode::RowLru);
    return KernelCache(data, gamma, m, o.cache_budget);
}

void check_grid(const GridSpec& grid) {
    if (grid.lambdas.empty() || grid.gammas.empty()) throw std::invalid_argument("empty grid");
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
        if (!(grid.lambdas[i] > 0.0)) throw std::invalid_argument("lambdas must be positive");
        if (i > 0 && !(grid.lambdas[i] < grid.lambdas[i - 1]))
            throw std::invalid_argument("lambdas must be strictly descending");
    }
    for (std::size_t i = 0; i < grid.gammas.size(); ++i) {
        if (!(grid.gammas[i] > 0.0)) throw std::invalid_argument("gammas must be positive");
        if (i > 0 && !(grid.gammas[i] > grid.gammas[i - 1]))
            throw std::invalid_argument("gammas must be strictly ascending");
    }
}

// Trains the ascending-cost chain for one (data, gamma_eff) pair, warm
// starting each session from the previous solution when enabled.
template <typename PerCost>
void run_cost_chain(const TrainingSet& data, KernelCache& cache, const KnnIndex* knn, double tau,
                    double gamma_eff, const std::vector<double>& costs_asc,
                    const SolverOptions& opts, PerCost&& per_cost) {
    std::optional<DualState> state;
    double prev_cost = 0.0;
    for (std::size_t ci = 0; ci < costs_asc.size(); ++ci) {
        const double c = costs_asc[ci];
        const HyperParams p = opts.make_params(tau, c, gamma_eff);
        const double t0 = now_seconds();
        if (!state || !opts.warm_start)
            state.emplace(DualState::cold_start(data, p, cache));
        else
            state.emplace(DualState::warm_start(*state, prev_cost, c));
        TrainResult r = (opts.solver_1d || data.size() < 2) ? train_1d(*state)
                                                            : train_2d(*state, knn);
        per_cost(ci, *state, r, now_seconds() - t0);
        prev_cost = c;
    }
}

void run_tasks(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

double cv_gamma_eff(std::size_t folds, std::size_t n, double gamma) {
    const double kd = static_cast<double>(folds);
    return (kd - 1.0) * static_cast<double>(n) * gamma / kd;
}

double cv_cost(std::size_t folds, std::size_t n, double lambda) {
    const double kd = static_cast<double>(folds);
    return kd / (2.0 * (kd - 1.0) * static_cast<double>(n) * lambda);
}

CvReport cv_select(const TrainingSet& train, double tau, const GridSpec& grid, std::size_t folds,
                   std::uint64_t seed, const SolverOptions& opts) {
    const std::size_t n = train.size();
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    if (n < folds) throw std::invalid_argument("more folds than samples");
    check_grid(grid);

    const std::size_t d = train.dim();
    const std::size_t n_lambda = grid.lambdas.size();
    const std::size_t n_gamma = grid.gammas.size();

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    // fold blocks of the permuted order
    struct Fold {
        TrainingSet data;
        std::vector<double> val_features;
        std::vector<double> val_labels;
        KnnIndex knn;
    };
    std::vector<Fold> fold_sets;
    fold_sets.reserve(folds);
    const bool need_knn = !opts.solver_1d && opts.wss == Wss::Wss2;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t lo = f * n / folds;
        const std::size_t hi = (f + 1) * n / folds;
        std::vector<double> tr_f, tr_y, va_f, va_y;
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = perm[r];
            const double* x = train.point(i);
            if (r >= lo && r < hi) {
                va_f.insert(va_f.end(), x, x + d);
                va_y.push_back(train.label(i));
            } else {
                tr_f.insert(tr_f.end(), x, x + d);
                tr_y.push_back(train.label(i));
            }
        }
        Fold fold{TrainingSet(std::move(tr_f), std::move(tr_y), d), std::move(va_f),
                  std::move(va_y), {}};
        if (need_knn) fold.knn = build_knn(fold.data, opts.knn);
        fold_sets.push_back(std::move(fold));
    }

    const double kd = static_cast<double>(folds);
    std::vector<double> costs(n_lambda);
    for (std::size_t li = 0; li < n_lambda; ++li) costs[li] = cv_cost(folds, n, grid.lambdas[li]);

    struct CellAcc {
        double risk = 0.0;
        std::uint64_t iterations = 0;
        double seconds = 0.0;
        bool converged = true;
    };
    std::vector<CellAcc> acc(n_lambda * n_gamma);
    std::mutex acc_mutex;

    run_tasks(folds * n_gamma, opts.threads, [&](std::size_t task) {
        const std::size_t f = task / n_gamma;
        const std::size_t gi = task % n_gamma;
        Fold& fold = fold_sets[f];
        const double gamma_eff = cv_gamma_eff(folds, n, grid.gammas[gi]);
        KernelCache cache = make_cache(fold.data, gamma_eff, opts);

        // validation kernel block, shared along the lambda chain
        const std::size_t nv = fold.val_labels.size();
        const std::size_t nt = fold.data.size();
        const double g2 = gamma_eff * gamma_eff;
        std::vector<double> kv(nv * nt);
        for (std::size_t v = 0; v < nv; ++v) {
            const double* xv = fold.val_features.data() + v * d;
            for (std::size_t i = 0; i < nt; ++i)
                kv[v * nt + i] = std::exp(-g2 * simd::squared_dist(xv, fold.data.point(i), d));
        }

        std::vector<CellAcc> local(n_lambda);
        run_cost_chain(fold.data, cache, need_knn ? &fold.knn : nullptr, tau, gamma_eff, costs,
                       opts, [&](std::size_t li, DualState& st, const TrainResult& r, double secs) {
                           std::vector<double> residuals(nv);
                           for (std::size_t v = 0; v < nv; ++v) {
                               double fhat = 0.0;
                               const double* row = kv.data() + v * nt;
                               for (std::size_t i = 0; i < nt; ++i)
                                   fhat += (st.alpha()[i] - st.beta()[i]) * row[i];
                               residuals[v] = fold.val_labels[v] - fhat;
                           }
                           local[li].risk = als_risk(residuals, tau);
                           local[li].iterations = r.iterations;
                           local[li].seconds = secs;
                           local[li].converged = r.converged();
                       });

        std::lock_guard<std::mutex> lock(acc_mutex);
        for (std::size_t li = 0; li < n_lambda; ++li) {
            CellAcc& cell = acc[li * n_gamma + gi];
            cell.risk += local[li].risk;
            cell.iterations += local[li].iterations;
            cell.seconds += local[li].seconds;
            cell.converged = cell.converged && local[li].converged;
        }
    });

    CvReport report;
    report.folds = folds;
    report.seed = seed;
    report.cells.resize(n_lambda * n_gamma);
    for (std::size_t li = 0; li < n_lambda; ++li) {
        for (std::size_t gi = 0; gi < n_gamma; ++gi) {
            const CellAcc& a = acc[li * n_gamma + gi];
            CvCell& cell = report.cells[li * n_gamma + gi];
            cell.lambda = grid.lambdas[li];
            cell.gamma = grid.gammas[gi];
            cell.mean_risk = a.risk / kd;
            cell.iterations = a.iterations;
            cell.seconds = a.seconds;
            cell.converged = a.converged;
        }
    }
    // cells run lambda-descending then gamma-ascending, so the first strict
    // minimum realizes the tie preference for larger lambda, smaller gamma
    report.best_index = 0;
    for (std::size_t c = 1; c < report.cells.size(); ++c)
        if (report.cells[c].mean_risk < report.cells[report.best_index].mean_risk)
            report.best_index = c;
    return report;
}

Model fit_direct(const TrainingSet& train, double tau, double cost, double gamma,
                 const SolverOptions& opts, const ScalingTransform& scaling, TrainResult* result) {
    const HyperParams p = opts.make_params(tau, cost, gamma);
    KernelCache cache = make_cache(train, gamma, opts);
    std::optional<KnnIndex> knn;
    const bool use_1d = opts.solver_1d || train.size() < 2;
    if (!use_1d && p.wss == Wss::Wss2) knn.emplace(build_knn(train, p.knn));
    DualState state = DualState::cold_start(train, p, cache);
    TrainResult r = use_1d ? train_1d(state) : train_2d(state, knn ? &*knn : nullptr);
    if (result) *result = std::move(r);
    return Model::from_state(state, scaling);
}

Model fit_grid_cell(const TrainingSet& train, double tau, double lambda, double gamma,
                    const SolverOptions& opts, const ScalingTransform& scaling,
                    TrainResult* result) {
    const double nd = static_cast<double>(train.size());
    return fit_direct(train, tau, cost_from_lambda(lambda, train.size()), nd * gamma, opts,
                      scaling, result);
}

double evaluate(const Model& model, const RawDataset& test, double tau, bool clipped) {
    if (test.n == 0) throw std::invalid_argument("empty test set");
    if (test.d != model.dim())
        throw DataError("test dimension " + std::to_string(test.d) + " does not match model " +
                        std::to_string(model.dim()));
    const ScalingTransform& sc = model.scaling();
    std::vector<double> xs(test.d);
    std::vector<double> residuals(test.n);
    for (std::size_t r = 0; r < test.n; ++r) {
        for (std::size_t j = 0; j < test.d; ++j)
            xs[j] = sc.scale_feature(j, test.features[r * test.d + j]);
        const double f = clipped ? model.predict_scaled_clipped(xs) : model.predict_scaled(xs);
        residuals[r] = sc.scale_label(test.labels[r]) - f;
    }
    return als_risk(residuals, tau);
}

CurveTable expectile_curves(const RawDataset& data, const std::vector<double>& taus, double cost,
                            double gamma, const SolverOptions& opts,
                            std::optional<std::size_t> feature, std::size_t grid_points,
                            bool sqrt_x) {
    if (taus.empty()) throw std::invalid_argument("need at least one tau");
    if (grid_points < 2) throw std::invalid_argument("need at least two grid points");
    if (!feature) {
        if (data.d != 1)
            throw DataError("multi-dimensional data needs a designated curve feature");
        feature = 0;
    }
    if (*feature >= data.d) throw std::invalid_argument("curve feature out of range");

    RawDataset work = data;
    if (sqrt_x) {
        for (std::size_t i = 0; i < work.n; ++i) {
            double& v = work.features[i * work.d + *feature];
            if (v < 0.0) throw DataError("square-root transform needs nonnegative values");
            v = std::sqrt(v);
        }
    }
    auto [train, transform] = scale_to_unit_box(work);

    double lo = work.features[*feature], hi = lo;
    for (std::size_t i = 0; i < work.n; ++i) {
        double v = work.features[i * work.d + *feature];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    CurveTable table;
    table.taus = taus;
    table.xs.resize(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g)
        table.xs[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);

    std::vector<double> point(work.d);
    for (std::size_t j = 0; j < work.d; ++j) point[j] = transform.offset[j];

    table.curves.resize(taus.size());
    for (std::size_t t = 0; t < taus.size(); ++t) {
        Model model = fit_direct(train, taus[t], cost, gamma, opts, transform);
        auto& col = table.curves[t];
        col.resize(grid_points);
        for (std::size_t g = 0; g < grid_points; ++g) {
            point[*feature] = table.xs[g];
            col[g] = model.predict(point);
        }
    }
    return table;
}

std::vector<BenchRow> benchmark(const TrainingSet& train, const GridSpec& grid,
                                const std::vector<BenchConfig>& configs,
                                const SolverOptions& base) {
    check_grid(grid);
    if (configs.empty()) throw std::invalid_argument("no benchmark configurations");
    const std::size_t n = train.size();
    const double nd = static_cast<double>(n);
    const std::size_t n_lambda = grid.lambdas.size();
    const std::size_t n_gamma = grid.gammas.size();

    std::vector<double> costs(n_lambda);
    for (std::size_t li = 0; li < n_lambda; ++li)
        costs[li] = cost_from_lambda(grid.lambdas[li], n);

    struct TaskOut {
        std::vector<BenchRow> rows;
    };
    std::vector<TaskOut> outs(configs.size() * n_gamma);

    // neighbor lists depend only on the data and N, build each N once
    std::vector<std::pair<std::size_t, KnnIndex>> knn_by_count;
    for (const auto& cfg : configs) {
        if (cfg.solver_1d || cfg.wss != Wss::Wss2) continue;
        bool found = false;
        for (auto& [cnt, idx] : knn_by_count) found = found || cnt == cfg.knn;
        if (!found) knn_by_count.emplace_back(cfg.knn, build_knn(train, cfg.knn));
    }
    auto knn_for = [&](std::size_t count) -> const KnnIndex* {
        for (auto& [cnt, idx] : knn_by_count)
            if (cnt == count) return &idx;
        return nullptr;
    };

    run_tasks(outs.size(), base.threads, [&](std::size_t task) {
        const std::size_t ci = task / n_gamma;
        const std::size_t gi = task % n_gamma;
        const BenchConfig& cfg = configs[ci];
        SolverOptions opts = base;
        opts.solver_1d = cfg.solver_1d;
        opts.wss = cfg.wss;
        opts.warm_start = cfg.warm_start;
        opts.use_clipped_gap = cfg.use_clipped_gap;
        opts.knn = cfg.knn;

        const double gamma_eff = nd * grid.gammas[gi];
        KernelCache cache = make_cache(train, gamma_eff, opts);
        auto& rows = outs[task].rows;
        run_cost_chain(train, cache, knn_for(cfg.knn), cfg.tau, gamma_eff, costs, opts,
                       [&](std::size_t li, DualState&, const TrainResult& r, double secs) {
                           rows.push_back({cfg, false, grid.lambdas[li], grid.gammas[gi],
                                           r.iterations, secs, r.converged()});
                       });
    });

    std::vector<BenchRow> rows;
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        BenchRow total{configs[ci], true, 0.0, 0.0, 0, 0.0, true};
        for (std::size_t gi = 0; gi < n_gamma; ++gi) {
            for (const auto& row : outs[ci * n_gamma + gi].rows) {
                rows.push_back(row);
                total.iterations += row.iterations;
                total.seconds += row.seconds;
                total.converged = total.converged && row.converged;
            }
        }
        rows.push_back(total);
    }
    return rows;
}

namespace {

const char* wss_label(const BenchConfig& cfg) {
    if (cfg.solver_1d) return "scan";
    return cfg.wss == Wss::Wss1 ? "wss1" : "wss2";
}

} // namespace

void write_cv_table(std::ostream& out, const CvReport& report, char delim) {
    out << "lambda" << delim << "gamma" << delim << "mean_risk" << delim << "iterations" << delim
        << "seconds" << delim << "converged" << delim << "best\n";
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const CvCell& cell = report.cells[c];
        out << fmt_g(cell.lambda) << delim << fmt_g(cell.gamma) << delim << fmt_g(cell.mean_risk)
            << delim << cell.iterations << delim << fmt_g(cell.seconds) << delim
            << (cell.converged ? 1 : 0) << delim << (c == report.best_index ? 1 : 0) << "\n";
    }
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows, char delim) {
    out << "tau" << delim << "wss" << delim << "init" << delim << "gap" << delim << "knn" << delim
        << "scope" << delim << "lambda" << delim << "gamma" << delim << "iterations" << delim
        << "seconds" << delim << "converged\n";
    for (const auto& r : rows) {
        out << fmt_g(r.config.tau) << delim << wss_label(r.config) << delim
            << (r.config.warm_start ? "warm" : "cold") << delim
            << (r.config.use_clipped_gap ? "clipped" : "unclipped") << delim << r.config.knn
            << delim << (r.total ? "total" : "cell") << delim;
        if (r.total)
            out << "-" << delim << "-";
        else
            out << fmt_g(r.lambda) << delim << fmt_g(r.gamma);
        out << delim << r.iterations << delim << fmt_g(r.seconds) << delim
            << (r.converged ? 1 : 0) << "\n";
    }
}

void write_curve_table(std::ostream& out, const CurveTable& table, char delim) {
    out << "x";
    for (double t : table.taus) {
        char label[32];
        std::snprintf(label, sizeof(label), "tau=%g", t);
        out << delim << label;
    }
    out << "\n";
    for (std::size_t g = 0; g < table.xs.size(); ++g) {
        out << fmt_g(table.xs[g]);
        for (const auto& col : table.curves) out << delim << fmt_g(col[g]);
        out << "\n";
    }
}

} // namespace ersvm
