#include "robustpolicy/policy.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robustpolicy/dataset.hpp"
#include "robustpolicy/errors.hpp"

namespace robustpolicy {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd p = scores;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double m = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - m).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

SoftmaxPolicy SoftmaxPolicy::linear(int d_x, int d_a, std::uint64_t seed) {
    SoftmaxPolicy pol;
    pol.net_ = FeedForwardNet(d_x, {}, d_a);
    pol.net_.init(InitScheme::TinyUniform, seed);
    return pol;
}

SoftmaxPolicy SoftmaxPolicy::mlp(int d_x, const std::vector<int>& hidden, int d_a, std::uint64_t seed,
                                 InitScheme scheme, double x_lo, double x_hi) {
    SoftmaxPolicy pol;
    pol.net_ = FeedForwardNet(d_x, hidden, d_a);
    pol.net_.init(scheme, seed, x_lo, x_hi);
    return pol;
}

Eigen::VectorXd SoftmaxPolicy::scores(const Eigen::VectorXd& x) const {
    if (x.size() != d_x()) throw ConfigError("covariate dimension mismatch");
    return net_.forward(x.transpose()).row(0).transpose();
}

Eigen::VectorXd SoftmaxPolicy::probs(const Eigen::VectorXd& x) const {
    Eigen::VectorXd s = scores(x);
    double m = s.maxCoeff();
    Eigen::VectorXd p = (s.array() - m).exp();
    return p / p.sum();
}

Eigen::MatrixXd SoftmaxPolicy::probs_batch(const Eigen::MatrixXd& X) const {
    return softmax_rows(net_.forward(X));
}

Eigen::VectorXd SoftmaxPolicy::grad_from_score_grad(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dS) const {
    auto cache = net_.forward_cached(X);
    return net_.backward(cache, dS);
}

Eigen::MatrixXd SoftmaxPolicy::policy_jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd X = x.transpose();
    Eigen::VectorXd p = probs(x);
    int da = d_a();
    Eigen::MatrixXd jac(da, param_count());
    for (int a = 0; a < da; ++a) {
        // d pi_a / d s_b = pi_a (1{a=b} - pi_b)
        Eigen::MatrixXd dS(1, da);
        for (int b = 0; b < da; ++b) dS(0, b) = p(a) * ((a == b ? 1.0 : 0.0) - p(b));
        jac.row(a) = grad_from_score_grad(X, dS).transpose();
    }
    return jac;
}

void SoftmaxPolicy::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    // First line: family and dims; then one line of row-major parameters per layer tensor.
    out << (is_linear() ? "linear" : "mlp") << ' ' << d_x();
    for (int h : net_.hidden()) out << ' ' << h;
    out << ' ' << d_a() << "\n";
    for (int l = 0; l < net_.layer_count(); ++l) {
        const auto& W = net_.weights()[l];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c)
                out << format_double(W(r, c)) << ((r + 1 == W.rows() && c + 1 == W.cols()) ? "" : " ");
        out << "\n";
        const auto& b = net_.biases()[l];
        for (Eigen::Index i = 0; i < b.size(); ++i) out << format_double(b(i)) << (i + 1 == b.size() ? "" : " ");
        out << "\n";
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

SoftmaxPolicy SoftmaxPolicy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string family;
    if (!(in >> family)) throw DataError("empty policy file '" + path + "'");
    std::vector<int> dims;
    {
        std::string rest;
        std::getline(in, rest);
        std::istringstream ss(rest);
        int d;
        while (ss >> d) dims.push_back(d);
    }
    if (dims.size() < 2) throw DataError("bad policy dims in '" + path + "'");
    if (family != "linear" && family != "mlp") throw DataError("unknown policy family '" + family + "'");
    if (family == "linear" && dims.size() != 2) throw DataError("linear policy must have exactly 2 dims");
    std::vector<int> hidden(dims.begin() + 1, dims.end() - 1);
    SoftmaxPolicy pol;
    pol.net_ = FeedForwardNet(dims.front(), hidden, dims.back());
    Eigen::VectorXd p(pol.param_count());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        std::string tok;
        if (!(in >> tok)) throw DataError("truncated policy file '" + path + "'");
        p(i) = parse_double(tok);
    }
    pol.set_params(p);
    return pol;
}

BaselinePolicy BaselinePolicy::uniform(int d_a) {
    BaselinePolicy b;
    b.impl_ = Uniform{d_a};
    return b;
}

BaselinePolicy BaselinePolicy::constant(const Eigen::VectorXd& probs) {
    if (probs.minCoeff() < 0.0 || std::abs(probs.sum() - 1.0) > 1e-9) {
        throw ConfigError("baseline probabilities must be nonnegative and sum to 1");
    }
    BaselinePolicy b;
    b.impl_ = probs;
    return b;
}

BaselinePolicy BaselinePolicy::frozen(SoftmaxPolicy policy) {
    BaselinePolicy b;
    b.impl_ = std::move(policy);
    return b;
}

int BaselinePolicy::d_a() const {
    if (std::holds_alternative<Uniform>(impl_)) return std::get<Uniform>(impl_).d_a;
    if (std::holds_alternative<Eigen::VectorXd>(impl_)) return static_cast<int>(std::get<Eigen::VectorXd>(impl_).size());
    return std::get<SoftmaxPolicy>(impl_).d_a();
}

Eigen::VectorXd BaselinePolicy::probs(const Eigen::VectorXd& x) const {
    if (std::holds_alternative<Uniform>(impl_)) {
        int da = std::get<Uniform>(impl_).d_a;
        return Eigen::VectorXd::Constant(da, 1.0 / da);
    }
    if (std::holds_alternative<Eigen::VectorXd>(impl_)) return std::get<Eigen::VectorXd>(impl_);
    return std::get<SoftmaxPolicy>(impl_).probs(x);
}

Eigen::MatrixXd BaselinePolicy::probs_batch(const Eigen::MatrixXd& X) const {
    if (std::holds_alternative<SoftmaxPolicy>(impl_)) return std::get<SoftmaxPolicy>(impl_).probs_batch(X);
    Eigen::VectorXd row;
    if (std::holds_alternative<Uniform>(impl_)) {
        int da = std::get<Uniform>(impl_).d_a;
        row = Eigen::VectorXd::Constant(da, 1.0 / da);
    } else {
        row = std::get<Eigen::VectorXd>(impl_);
    }
    Eigen::MatrixXd out(X.rows(), row.size());
    out.rowwise() = row.transpose();
    return out;
}

}  // namespace robustpolicy
