#include "ersvm/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ersvm/simd.hpp"

namespace ersvm {

namespace {

constexpr int kFormatVersion = 1;
constexpr double kCoeffFloor = 1e-12;

void write_double(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

std::string next_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ModelIoError(ModelIoError::Kind::Truncated,
                                                    "model file ended early");
    return line;
}

double parse_double(const std::string& tok) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size() || !std::isfinite(v))
            throw ModelIoError(ModelIoError::Kind::Malformed, "malformed number: " + tok);
        return v;
    } catch (const ModelIoError&) {
        throw;
    } catch (const std::exception&) {
        throw ModelIoError(ModelIoError::Kind::Malformed, "malformed number: " + tok);
    }
}

std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double expect_field(std::istream& in, const std::string& name) {
    auto toks = tokens(next_line(in));
    if (toks.size() != 2 || toks[0] != name)
        throw ModelIoError(ModelIoError::Kind::Structure, "expected field '" + name + "'");
    return parse_double(toks[1]);
}

} // namespace

Model::Model(std::vector<double> support_row_major, std::vector<double> coefficients,
             std::size_t d, double tau, double cost, double gamma, double clip_m,
             ScalingTransform scaling)
    : support_(std::move(support_row_major)),
      coefficients_(std::move(coefficients)),
      d_(d),
      tau_(tau),
      cost_(cost),
      gamma_(gamma),
      clip_m_(clip_m),
      scaling_(std::move(scaling)) {
    if (d_ == 0) throw std::invalid_argument("model dimension must be positive");
    if (support_.size() != coefficients_.size() * d_)
        throw std::invalid_argument("support matrix shape does not match coefficients");
    if (scaling_.offset.size() != d_ + 1 || scaling_.scale.size() != d_ + 1)
        throw std::invalid_argument("scaling transform shape does not match the dimension");
    for (double s : scaling_.scale)
        if (s == 0.0 || !std::isfinite(s))
            throw std::invalid_argument("scaling transform is not invertible");
}

Model Model::from_state(const DualState& state, const ScalingTransform& scaling) {
    const TrainingSet& data = state.data();
    std::vector<double> support;
    std::vector<double> coeff;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double u = state.alpha()[i] - state.beta()[i];
        if (std::fabs(u) < kCoeffFloor) continue;
        coeff.push_back(u);
        const double* x = data.point(i);
        support.insert(support.end(), x, x + data.dim());
    }
    return Model(std::move(support), std::move(coeff), data.dim(), state.params().tau,
                 state.params().cost, state.params().gamma, state.params().clip_m, scaling);
}

double Model::predict_scaled(std::span<const double> xs) const {
    if (xs.size() != d_) throw std::invalid_argument("point dimension does not match the model");
    const double g2 = gamma_ * gamma_;
    double acc = 0.0;
    for (std::size_t i = 0; i < coefficients_.size(); ++i)
        acc += coefficients_[i] *
               std::exp(-g2 * simd::squared_dist(support_.data() + i * d_, xs.data(), d_));
    return acc;
}

double Model::predict_scaled_clipped(std::span<const double> xs) const {
    double v = predict_scaled(xs);
    return v > clip_m_ ? clip_m_ : (v < -clip_m_ ? -clip_m_ : v);
}

double Model::predict(std::span<const double> x) const {
    if (x.size() != d_) throw std::invalid_argument("point dimension does not match the model");
    std::vector<double> xs(d_);
    for (std::size_t j = 0; j < d_; ++j) xs[j] = scaling_.scale_feature(j, x[j]);
    return scaling_.unscale_label(predict_scaled(xs));
}

double Model::predict_clipped(std::span<const double> x) const {
    if (x.size() != d_) throw std::invalid_argument("point dimension does not match the model");
    std::vector<double> xs(d_);
    for (std::size_t j = 0; j < d_; ++j) xs[j] = scaling_.scale_feature(j, x[j]);
    return scaling_.unscale_label(predict_scaled_clipped(xs));
}

void Model::save(std::ostream& out) const {
    out << "ersvm-model " << kFormatVersion << "\n";
    const std::size_t m = coefficients_.size();
    out << "m " << m << "\n";
    out << "d " << d_ << "\n";
    auto field = [&](const char* name, double v) {
        out << name << " ";
        write_double(out, v);
        out << "\n";
    };
    field("tau", tau_);
    field("cost", cost_);
    field("gamma", gamma_);
    field("clip", clip_m_);
    out << "scaling\n";
    for (std::size_t j = 0; j <= d_; ++j) {
        write_double(out, scaling_.offset[j]);
        out << " ";
        write_double(out, scaling_.scale[j]);
        out << "\n";
    }
    out << "points\n";
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
            write_double(out, support_[i * d_ + j]);
            out << " ";
        }
        write_double(out, coefficients_[i]);
        out << "\n";
    }
    out << "end\n";
}

void Model::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ModelIoError(ModelIoError::Kind::Structure, "cannot open " + path);
    save(out);
    if (!out) throw ModelIoError(ModelIoError::Kind::Structure, "failed writing " + path);
}

Model Model::load(std::istream& in) {
    auto header = tokens(next_line(in));
    if (header.size() != 2 || header[0] != "ersvm-model")
        throw ModelIoError(ModelIoError::Kind::Structure, "not a model file");
    if (header[1] != std::to_string(kFormatVersion))
        throw ModelIoError(ModelIoError::Kind::Version,
                           "unsupported model format version " + header[1]);

    const auto m = static_cast<std::size_t>(expect_field(in, "m"));
    const auto d = static_cast<std::size_t>(expect_field(in, "d"));
    const double tau = expect_field(in, "tau");
    const double cost = expect_field(in, "cost");
    const double gamma = expect_field(in, "gamma");
    const double clip = expect_field(in, "clip");

    if (next_line(in) != "scaling")
        throw ModelIoError(ModelIoError::Kind::Structure, "expected scaling block");
    ScalingTransform scaling;
    for (std::size_t j = 0; j <= d; ++j) {
        auto toks = tokens(next_line(in));
        if (toks.size() != 2)
            throw ModelIoError(ModelIoError::Kind::Structure, "scaling row needs two numbers");
        scaling.offset.push_back(parse_double(toks[0]));
        scaling.scale.push_back(parse_double(toks[1]));
    }

    if (next_line(in) != "points")
        throw ModelIoError(ModelIoError::Kind::Structure, "expected points block");
    std::vector<double> support;
    std::vector<double> coeff;
    support.reserve(m * d);
    coeff.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto toks = tokens(next_line(in));
        if (toks.size() != d + 1)
            throw ModelIoError(ModelIoError::Kind::Structure,
                               "support record " + std::to_string(i) + " has wrong field count");
        for (std::size_t j = 0; j < d; ++j) support.push_back(parse_double(toks[j]));
        coeff.push_back(parse_double(toks[d]));
    }
    if (next_line(in) != "end")
        throw ModelIoError(ModelIoError::Kind::Truncated, "missing end marker");

    try {
        return Model(std::move(support), std::move(coeff), d, tau, cost, gamma, clip,
                     std::move(scaling));
    } catch (const std::invalid_argument& e) {
        throw ModelIoError(ModelIoError::Kind::Structure, e.what());
    }
}

Model Model::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError(ModelIoError::Kind::Structure, "cannot open " + path);
    return load(in);
}

} // namespace ersvm
