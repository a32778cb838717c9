#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "ersvm/model.hpp"
#include "ersvm/rng.hpp"

using namespace ersvm;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("ersvm_cli_" + std::to_string(getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(ERSVM_CLI_PATH) + " " + args + " 2>" +
                      (work_dir() / "stderr.txt").string();
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_file(const std::string& name, const std::string& content) {
    fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string sine_csv(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::ostringstream out;
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.uniform();
        out << x << "," << std::sin(6.283185307179586 * x) + 0.1 * rng.normal() << "\n";
    }
    return out.str();
}

// field of a "name\tvalue" summary line
std::string summary_field(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto tab = line.find('\t');
        if (tab != std::string::npos && line.substr(0, tab) == name) return line.substr(tab + 1);
    }
    return {};
}

// strip a tab-separated column (timings differ between runs)
std::string drop_column(const std::string& text, std::size_t column) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::size_t idx = 0;
        bool first = true;
        while (std::getline(cells, cell, '\t')) {
            if (idx++ == column) continue;
            out << (first ? "" : "\t") << cell;
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace

TEST_CASE("training the one-sample toy problem") {
    auto data = write_file("one.csv", "0.0,3.0\n");
    auto model_path = (work_dir() / "one.model").string();
    auto r = run_cli("train --data " + data + " --model " + model_path +
                     " --tau 0.5 --cost 0.5 --gamma 1 --no-scale");
    CHECK(r.code == 0);
    CHECK(summary_field(r.out, "gap") == "0");
    CHECK(summary_field(r.out, "converged") == "1");

    Model m = Model::load(model_path);
    REQUIRE(m.support_size() == 1);
    CHECK(m.coefficients()[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("usage and data errors carry distinct exit codes") {
    auto data = write_file("two.csv", "0.0,1.0\n1.0,-1.0\n");
    auto model_path = (work_dir() / "two.model").string();
    CHECK(run_cli("train --data " + data + " --model " + model_path +
                  " --tau 1.0 --cost 1 --gamma 1")
              .code == 1);
    CHECK(run_cli("train --data " + data + " --model " + model_path + " --tau 0.5 --gamma 1")
              .code == 1); // neither lambda nor cost
    CHECK(run_cli("train --data " + data + " --model " + model_path +
                  " --tau 0.5 --cost 1 --lambda 0.1 --gamma 1")
              .code == 1); // both
    CHECK(run_cli("train --data /missing.csv --model " + model_path +
                  " --tau 0.5 --cost 1 --gamma 1")
              .code == 2);
    CHECK(run_cli("train --bogus-flag --data " + data).code == 1);

    auto bad = write_file("bad.csv", "1,2\noops,3\n");
    CHECK(run_cli("train --data " + bad + " --model " + model_path +
                  " --tau 0.5 --cost 1 --gamma 1")
              .code == 2);
}

TEST_CASE("iteration cap exits with the non-convergence code") {
    auto data = write_file("sine_small.csv", sine_csv(30, 3));
    auto model_path = (work_dir() / "capped.model").string();
    auto r = run_cli("train --data " + data + " --model " + model_path +
                     " --tau 0.5 --lambda 1e-6 --gamma 3 --epsilon 1e-10 --max-iter 2");
    CHECK(r.code == 3);
    CHECK(summary_field(r.out, "converged") == "0");
}

TEST_CASE("prediction round trip") {
    auto data = write_file("train.csv", sine_csv(40, 7));
    auto model_path = (work_dir() / "rt.model").string();
    auto r = run_cli("train --data " + data + " --model " + model_path +
                     " --tau 0.5 --lambda 0.001 --gamma 2");
    REQUIRE(r.code == 0);

    auto features = write_file("query.csv", "0.1,0\n0.5,0\n0.9,0\n");
    auto p = run_cli("predict --data " + features + " --model " + model_path);
    REQUIRE(p.code == 0);

    Model m = Model::load(model_path);
    std::istringstream lines(p.out);
    std::string line;
    for (double x : {0.1, 0.5, 0.9}) {
        REQUIRE(std::getline(lines, line));
        std::vector<double> point{x};
        CHECK(std::stod(line) == doctest::Approx(m.predict(point)).epsilon(1e-12));
    }

    // empty input is an empty success
    auto empty = write_file("empty.csv", "\n");
    auto pe = run_cli("predict --data " + empty + " --model " + model_path);
    CHECK(pe.code == 0);
    CHECK(pe.out.empty());

    // wrong dimension is a data error
    auto wide = write_file("wide.csv", "0.1,0.2,0\n");
    CHECK(run_cli("predict --data " + wide + " --model " + model_path).code == 2);

    // clipped predictions stay inside the unscaled clip band
    auto pc = run_cli("predict --data " + features + " --model " + model_path + " --clip");
    CHECK(pc.code == 0);
}

TEST_CASE("sparse input, clipped gap and file output") {
    Rng rng(29);
    std::ostringstream sparse;
    for (int i = 0; i < 30; ++i) {
        double x = rng.uniform();
        sparse << std::sin(6.283185307179586 * x) + 0.1 * rng.normal() << " 1:" << x << "\n";
    }
    auto data = write_file("train.sparse", sparse.str());
    auto model_path = (work_dir() / "sparse.model").string();
    auto r = run_cli("train --data " + data + " --format sparse --model " + model_path +
                     " --tau 0.5 --lambda 0.001 --gamma 2 --gap clipped");
    REQUIRE(r.code == 0);
    CHECK(summary_field(r.out, "converged") == "1");

    auto query = write_file("sparse_query.sparse", "0 1:0.25\n0 1:0.75\n");
    auto out_path = (work_dir() / "preds.txt").string();
    auto p = run_cli("predict --data " + query + " --format sparse --model " + model_path +
                     " --output " + out_path);
    REQUIRE(p.code == 0);
    std::ifstream preds(out_path);
    double up, down;
    REQUIRE((preds >> up >> down));
    CHECK(up > 0.0);   // sine near its crest
    CHECK(down < 0.0); // and near its trough
}

TEST_CASE("cross validation is reproducible") {
    auto data = write_file("cv.csv", sine_csv(60, 13));
    auto model_path = (work_dir() / "cv.model").string();
    std::string args = "cv --data " + data + " --model " + model_path +
                       " --tau 0.5 --folds 3 --seed 7 --grid-lambdas 2 --grid-gammas 2" +
                       " --epsilon 1e-3";
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(drop_column(a.out, 4) == drop_column(b.out, 4));
    CHECK(fs::exists(model_path));

    auto single = run_cli("cv --data " + data + " --model " + model_path +
                          " --tau 0.5 --folds 3 --seed 7 --grid-lambdas 1 --grid-gammas 1");
    REQUIRE(single.code == 0);
    std::size_t lines = 0;
    for (char c : single.out)
        if (c == '\n') ++lines;
    CHECK(lines == 2); // header plus the single cell
}

TEST_CASE("bench emits one block per configuration") {
    auto data = write_file("bench.csv", sine_csv(40, 17));
    auto r = run_cli("bench --data " + data +
                     " --taus 0.5 --wss-list wss1,wss2 --init-list warm" +
                     " --gap-list unclipped --grid-lambdas 2 --grid-gammas 1 --epsilon 1e-2");
    REQUIRE(r.code == 0);
    std::size_t totals = 0, cells = 0;
    std::istringstream in(r.out);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("\ttotal\t") != std::string::npos) ++totals;
        if (line.find("\tcell\t") != std::string::npos) ++cells;
    }
    CHECK(totals == 2);
    CHECK(cells == 4);
}

TEST_CASE("curves table shape and the square-root transform") {
    auto data = write_file("curves.csv", sine_csv(60, 19));
    auto r = run_cli("curves --data " + data +
                     " --taus 0.25,0.5,0.75 --cost 20 --gamma 2 --grid-points 11");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.find("tau=0.25") != std::string::npos);
    CHECK(header.find("tau=0.75") != std::string::npos);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 11);

    auto t = run_cli("curves --data " + data +
                     " --taus 0.5 --cost 20 --gamma 2 --grid-points 5 --sqrt-x");
    REQUIRE(t.code == 0);
    std::istringstream tin(t.out);
    std::getline(tin, header);
    std::getline(tin, line);
    double first_x = std::stod(line.substr(0, line.find('\t')));
    CHECK(first_x >= 0.0);
    CHECK(first_x <= 1.0); // sqrt of a unit-interval sample
}

TEST_SUITE_END();
