#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ersvm/experiment.hpp"
#include "ersvm/model.hpp"
#include "ersvm/simd.hpp"

namespace {

using namespace ersvm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConvergence = 3;

struct DataArgs {
    std::string path;
    std::string format = "csv";
    int label_col = -1;
};

struct SolverArgs {
    double epsilon = 1e-3;
    double clip_m = 1.0;
    std::string gap = "unclipped";
    std::string solver = "2d";
    std::string wss = "wss2";
    std::size_t knn = 15;
    std::uint64_t max_iter = 10'000'000;
    bool no_warm_start = false;
    std::size_t threads = 1;
    std::string cache = "auto";
    std::size_t cache_rows = 1024;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "input data file")->required();
    cmd->add_option("--format", args.format, "input format")
        ->check(CLI::IsMember({"csv", "sparse"}));
    cmd->add_option("--label-col", args.label_col, "label column for csv input, -1 = last");
}

void add_solver_options(CLI::App* cmd, SolverArgs& args) {
    cmd->add_option("--epsilon", args.epsilon, "stopping tolerance");
    cmd->add_option("--clip", args.clip_m, "clipping bound M");
    cmd->add_option("--gap", args.gap, "duality gap variant")
        ->check(CLI::IsMember({"unclipped", "clipped"}));
    cmd->add_option("--solver", args.solver, "coordinate solver")
        ->check(CLI::IsMember({"1d", "2d"}));
    cmd->add_option("--wss", args.wss, "working set selection")
        ->check(CLI::IsMember({"scan", "wss1", "wss2"}));
    cmd->add_option("--knn", args.knn, "neighbor count for wss2");
    cmd->add_option("--max-iter", args.max_iter, "iteration cap");
    cmd->add_flag("--no-warm-start", args.no_warm_start, "cold start every grid cell");
    cmd->add_option("--threads", args.threads, "worker threads for cv/bench");
    cmd->add_option("--cache", args.cache, "kernel cache mode")
        ->check(CLI::IsMember({"auto", "full", "lru"}));
    cmd->add_option("--cache-rows", args.cache_rows, "row budget for the lru cache");
}

SolverOptions make_options(const SolverArgs& args) {
    SolverOptions o;
    o.epsilon = args.epsilon;
    o.clip_m = args.clip_m;
    o.use_clipped_gap = args.gap == "clipped";
    o.solver_1d = args.solver == "1d" || args.wss == "scan";
    o.wss = args.wss == "wss1" ? Wss::Wss1 : Wss::Wss2;
    o.knn = args.knn;
    o.max_iter = args.max_iter;
    o.warm_start = !args.no_warm_start;
    o.threads = args.threads;
    o.cache = args.cache == "auto" ? CachePolicy::Auto
                                   : (args.cache == "full" ? CachePolicy::Full
                                                           : CachePolicy::RowLru);
    o.cache_budget = args.cache_rows;
    return o;
}

RawDataset load_data(const DataArgs& args) {
    return ingest(args.path, args.format == "csv" ? DataFormat::Csv : DataFormat::Sparse,
                  args.label_col);
}

double resolve_cost(const std::optional<double>& lambda, const std::optional<double>& cost,
                    std::size_t n) {
    if (lambda.has_value() == cost.has_value())
        throw std::invalid_argument("give exactly one of --lambda and --cost");
    return cost ? *cost : cost_from_lambda(*lambda, n);
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot open " + path);
    return file;
}

GridSpec resolve_grid(std::size_t n, std::size_t d, std::size_t n_lambda, std::size_t n_gamma,
                      const std::vector<double>& lambdas, const std::vector<double>& gammas) {
    GridSpec g = default_grid(n, d, n_lambda, n_gamma);
    if (!lambdas.empty()) {
        g.lambdas = lambdas;
        std::sort(g.lambdas.begin(), g.lambdas.end(), std::greater<double>());
    }
    if (!gammas.empty()) {
        g.gammas = gammas;
        std::sort(g.gammas.begin(), g.gammas.end());
    }
    return g;
}

double wall_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

int run_train(const DataArgs& data_args, const SolverArgs& solver_args, double tau,
              std::optional<double> lambda, std::optional<double> cost,
              std::optional<double> gamma, const std::string& model_path, bool no_scale) {
    RawDataset raw = load_data(data_args);
    auto [train, transform] =
        no_scale ? std::pair<TrainingSet, ScalingTransform>{TrainingSet(raw.features, raw.labels,
                                                                        raw.d),
                                                            ScalingTransform::identity(raw.d)}
                 : scale_to_unit_box(raw);
    SolverOptions opts = make_options(solver_args);
    if (!gamma) throw std::invalid_argument("--gamma is required");

    const double t0 = wall_seconds();
    TrainResult result;
    Model model =
        fit_direct(train, tau, resolve_cost(lambda, cost, train.size()), *gamma, opts, transform,
                   &result);
    const double secs = wall_seconds() - t0;
    model.save(model_path);

    std::cout << "iterations\t" << result.iterations << "\n";
    std::cout << "gap\t" << result.final_gap.s << "\n";
    std::cout << "threshold\t" << result.final_gap.threshold << "\n";
    std::cout << "support\t" << model.support_size() << "\n";
    std::cout << "seconds\t" << secs << "\n";
    std::cout << "converged\t" << (result.converged() ? 1 : 0) << "\n";
    if (!result.converged()) {
        std::cerr << "warning: stopped before reaching the gap threshold\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

int run_predict(const DataArgs& data_args, const std::string& model_path, bool clip,
                const std::string& output) {
    Model model = Model::load(model_path);

    // an empty feature file is a valid request for zero predictions
    {
        std::ifstream probe(data_args.path);
        if (!probe) throw DataError("cannot open " + data_args.path);
        std::string line;
        bool any = false;
        while (std::getline(probe, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                any = true;
                break;
            }
        if (!any) return kExitOk;
    }

    RawDataset raw = load_data(data_args);
    if (raw.d != model.dim())
        throw DataError("input dimension " + std::to_string(raw.d) + " does not match model " +
                        std::to_string(model.dim()));
    std::ofstream file;
    std::ostream& out = open_output(file, output);
    char buf[40];
    for (std::size_t i = 0; i < raw.n; ++i) {
        std::span<const double> x{raw.features.data() + i * raw.d, raw.d};
        const double y = clip ? model.predict_clipped(x) : model.predict(x);
        std::snprintf(buf, sizeof(buf), "%.17g", y);
        out << buf << "\n";
    }
    return kExitOk;
}

int run_cv(const DataArgs& data_args, const SolverArgs& solver_args, double tau,
           std::size_t folds, std::uint64_t seed, std::size_t n_lambda, std::size_t n_gamma,
           const std::vector<double>& lambdas, const std::vector<double>& gammas,
           const std::string& model_path, const std::string& report_path, char delim) {
    RawDataset raw = load_data(data_args);
    auto [train, transform] = scale_to_unit_box(raw);
    SolverOptions opts = make_options(solver_args);
    GridSpec grid = resolve_grid(train.size(), train.dim(), n_lambda, n_gamma, lambdas, gammas);

    CvReport report = cv_select(train, tau, grid, folds, seed, opts);
    std::ofstream file;
    std::ostream& out = open_output(file, report_path);
    write_cv_table(out, report, delim);

    TrainResult refit;
    Model model = fit_grid_cell(train, tau, report.best().lambda, report.best().gamma, opts,
                                transform, &refit);
    if (!model_path.empty()) model.save(model_path);
    std::cerr << "best lambda " << report.best().lambda << " gamma " << report.best().gamma
              << " risk " << report.best().mean_risk << "\n";
    if (!refit.converged()) {
        std::cerr << "warning: refit stopped before reaching the gap threshold\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

int run_bench(const DataArgs& data_args, const SolverArgs& solver_args,
              const std::vector<double>& taus, const std::vector<std::string>& wss_list,
              const std::vector<std::string>& init_list, const std::vector<std::string>& gap_list,
              const std::vector<std::size_t>& knn_list, std::size_t n_lambda, std::size_t n_gamma,
              const std::vector<double>& lambdas, const std::vector<double>& gammas,
              const std::string& output, char delim) {
    RawDataset raw = load_data(data_args);
    auto [train, transform] = scale_to_unit_box(raw);
    (void)transform;
    SolverOptions opts = make_options(solver_args);
    GridSpec grid = resolve_grid(train.size(), train.dim(), n_lambda, n_gamma, lambdas, gammas);

    for (const auto& wss : wss_list)
        if (wss != "scan" && wss != "wss1" && wss != "wss2")
            throw std::invalid_argument("unknown strategy in --wss-list: " + wss);
    for (const auto& init : init_list)
        if (init != "cold" && init != "warm")
            throw std::invalid_argument("unknown initialization in --init-list: " + init);
    for (const auto& gap : gap_list)
        if (gap != "unclipped" && gap != "clipped")
            throw std::invalid_argument("unknown variant in --gap-list: " + gap);

    std::vector<BenchConfig> configs;
    for (double tau : taus)
        for (const auto& wss : wss_list)
            for (const auto& init : init_list)
                for (const auto& gap : gap_list)
                    for (std::size_t knn : knn_list) {
                        BenchConfig cfg;
                        cfg.tau = tau;
                        cfg.solver_1d = wss == "scan";
                        cfg.wss = wss == "wss1" ? Wss::Wss1 : Wss::Wss2;
                        cfg.warm_start = init == "warm";
                        cfg.use_clipped_gap = gap == "clipped";
                        cfg.knn = knn;
                        configs.push_back(cfg);
                    }

    auto rows = benchmark(train, grid, configs, opts);
    std::ofstream file;
    std::ostream& out = open_output(file, output);
    write_bench_table(out, rows, delim);
    return kExitOk;
}

int run_curves(const DataArgs& data_args, const SolverArgs& solver_args,
               const std::vector<double>& taus, std::optional<double> lambda,
               std::optional<double> cost, std::optional<double> gamma,
               std::optional<std::size_t> feature, std::size_t grid_points, bool sqrt_x,
               const std::string& output, char delim) {
    RawDataset raw = load_data(data_args);
    SolverOptions opts = make_options(solver_args);
    if (!gamma) throw std::invalid_argument("--gamma is required");
    const double c = resolve_cost(lambda, cost, raw.n);
    CurveTable table = expectile_curves(raw, taus, c, *gamma, opts, feature, grid_points, sqrt_x);
    std::ofstream file;
    std::ostream& out = open_output(file, output);
    write_curve_table(out, table, delim);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"expectile regression with an SMO-style kernel solver"};
    app.require_subcommand(1);

    DataArgs data_args;
    SolverArgs solver_args;
    double tau = 0.5;
    std::optional<double> lambda, cost, gamma;
    std::string model_path, report_path, output;
    std::size_t folds = 5, n_lambda = 10, n_gamma = 10, grid_points = 200;
    std::uint64_t seed = 1;
    std::vector<double> taus, lambdas, gammas;
    std::vector<std::string> wss_list{"wss2"}, init_list{"warm"}, gap_list{"unclipped"};
    std::vector<std::size_t> knn_list{15};
    std::optional<std::size_t> feature;
    std::string delimiter = "\t";
    bool clip = false, sqrt_x = false, no_scale = false;

    auto* train_cmd = app.add_subcommand("train", "train a model at fixed hyperparameters");
    add_data_options(train_cmd, data_args);
    add_solver_options(train_cmd, solver_args);
    train_cmd->add_option("--tau", tau, "expectile level")->required();
    train_cmd->add_option("--lambda", lambda, "regularization parameter");
    train_cmd->add_option("--cost", cost, "cost C = 1/(2 n lambda)");
    train_cmd->add_option("--gamma", gamma, "kernel width parameter");
    train_cmd->add_option("--model", model_path, "model output path")->required();
    train_cmd->add_flag("--no-scale", no_scale, "train in raw units (data already scaled)");

    auto* predict_cmd = app.add_subcommand("predict", "predict with a trained model");
    add_data_options(predict_cmd, data_args);
    predict_cmd->add_option("--model", model_path, "model file")->required();
    predict_cmd->add_flag("--clip", clip, "clip predictions to [-M, M] in scaled space");
    predict_cmd->add_option("--output", output, "write predictions here instead of stdout");

    auto* cv_cmd = app.add_subcommand("cv", "cross-validated grid search plus refit");
    add_data_options(cv_cmd, data_args);
    add_solver_options(cv_cmd, solver_args);
    cv_cmd->add_option("--tau", tau, "expectile level")->required();
    cv_cmd->add_option("--folds", folds, "cross validation folds");
    cv_cmd->add_option("--seed", seed, "fold shuffle seed");
    cv_cmd->add_option("--grid-lambdas", n_lambda, "lambda grid size");
    cv_cmd->add_option("--grid-gammas", n_gamma, "gamma grid size");
    cv_cmd->add_option("--lambdas", lambdas, "explicit lambda grid")->delimiter(',');
    cv_cmd->add_option("--gammas", gammas, "explicit gamma grid")->delimiter(',');
    cv_cmd->add_option("--model", model_path, "refit model output path");
    cv_cmd->add_option("--report", report_path, "write the cell table here instead of stdout");
    cv_cmd->add_option("--delimiter", delimiter, "table delimiter (default tab)");

    auto* bench_cmd = app.add_subcommand("bench", "grid-search solver cost measurements");
    add_data_options(bench_cmd, data_args);
    add_solver_options(bench_cmd, solver_args);
    bench_cmd->add_option("--taus", taus, "expectile levels")->delimiter(',')->required();
    bench_cmd->add_option("--wss-list", wss_list, "strategies: scan,wss1,wss2")->delimiter(',');
    bench_cmd->add_option("--init-list", init_list, "initializations: cold,warm")->delimiter(',');
    bench_cmd->add_option("--gap-list", gap_list, "gap variants: unclipped,clipped")
        ->delimiter(',');
    bench_cmd->add_option("--knn-list", knn_list, "neighbor counts")->delimiter(',');
    bench_cmd->add_option("--grid-lambdas", n_lambda, "lambda grid size");
    bench_cmd->add_option("--grid-gammas", n_gamma, "gamma grid size");
    bench_cmd->add_option("--lambdas", lambdas, "explicit lambda grid")->delimiter(',');
    bench_cmd->add_option("--gammas", gammas, "explicit gamma grid")->delimiter(',');
    bench_cmd->add_option("--output", output, "write the table here instead of stdout");
    bench_cmd->add_option("--delimiter", delimiter, "table delimiter (default tab)");

    auto* curves_cmd = app.add_subcommand("curves", "expectile curve table over one feature");
    add_data_options(curves_cmd, data_args);
    add_solver_options(curves_cmd, solver_args);
    curves_cmd->add_option("--taus", taus, "expectile levels")->delimiter(',')->required();
    curves_cmd->add_option("--lambda", lambda, "regularization parameter");
    curves_cmd->add_option("--cost", cost, "cost C");
    curves_cmd->add_option("--gamma", gamma, "kernel width parameter");
    curves_cmd->add_option("--feature", feature, "designated feature for the x axis");
    curves_cmd->add_option("--grid-points", grid_points, "rows in the emitted table");
    curves_cmd->add_flag("--sqrt-x", sqrt_x, "square-root transform of the x variable");
    curves_cmd->add_option("--output", output, "write the table here instead of stdout");
    curves_cmd->add_option("--delimiter", delimiter, "table delimiter (default tab)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed())
            return run_train(data_args, solver_args, tau, lambda, cost, gamma, model_path,
                             no_scale);
        if (predict_cmd->parsed()) return run_predict(data_args, model_path, clip, output);
        if (delimiter.size() != 1) throw std::invalid_argument("--delimiter must be one character");
        if (cv_cmd->parsed())
            return run_cv(data_args, solver_args, tau, folds, seed, n_lambda, n_gamma, lambdas,
                          gammas, model_path, report_path, delimiter[0]);
        if (bench_cmd->parsed())
            return run_bench(data_args, solver_args, taus, wss_list, init_list, gap_list, knn_list,
                             n_lambda, n_gamma, lambdas, gammas, output, delimiter[0]);
        if (curves_cmd->parsed())
            return run_curves(data_args, solver_args, taus, lambda, cost, gamma, feature,
                              grid_points, sqrt_x, output, delimiter[0]);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ModelIoError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
