#include "robustpolicy/net.hpp"

#include <cmath>

#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

FeedForwardNet::FeedForwardNet(int in, std::vector<int> hidden, int out)
    : in_(in), out_(out), hidden_(std::move(hidden)) {
    if (in < 1 || out < 1) throw ConfigError("net dimensions must be positive");
    std::vector<int> dims;
    dims.push_back(in_);
    for (int h : hidden_) {
        if (h < 1) throw ConfigError("hidden sizes must be positive");
        dims.push_back(h);
    }
    dims.push_back(out_);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        weights_.emplace_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
        biases_.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
}

void FeedForwardNet::init(InitScheme scheme, std::uint64_t seed, double x_lo, double x_hi) {
    RandomStream rng(seed);
    const int L = layer_count();
    for (int l = 0; l < L; ++l) {
        auto& W = weights_[l];
        auto& b = biases_[l];
        const bool last = (l == L - 1);
        switch (scheme) {
            case InitScheme::TinyUniform: {
                for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-0.01, 0.01);
                for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.01, 0.01);
                break;
            }
            case InitScheme::FanInUniform: {
                double s = 1.0 / std::sqrt(static_cast<double>(W.cols()));
                for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-s, s);
                for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-s, s);
                break;
            }
            case InitScheme::KinkGrid: {
                if (l == 0 && L > 1) {
                    // Unit-magnitude alternating slopes, hinge locations on a
                    // uniform grid over a slightly extended covariate range;
                    // cycles through coordinates when the input is a vector.
                    double pad = 0.05 * (x_hi - x_lo);
                    double lo = x_lo - pad, hi = x_hi + pad;
                    W.setZero();
                    for (Eigen::Index j = 0; j < W.rows(); ++j) {
                        Eigen::Index coord = j % W.cols();
                        double sign = (j % 2 == 0) ? 1.0 : -1.0;
                        double w = sign * (1.0 + 0.05 * rng.uniform(-1.0, 1.0));
                        double k = lo + (static_cast<double>(j) + 0.5) * (hi - lo) / static_cast<double>(W.rows());
                        W(j, coord) = w;
                        b(j) = -w * k;
                    }
                } else if (last) {
                    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-0.01, 0.01);
                    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.01, 0.01);
                } else {
                    double s = std::sqrt(2.0 / static_cast<double>(W.cols()));
                    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = s * rng.normal();
                    b.setZero();
                }
                break;
            }
        }
    }
}

Eigen::Index FeedForwardNet::param_count() const {
    Eigen::Index c = 0;
    for (int l = 0; l < layer_count(); ++l) c += weights_[l].size() + biases_[l].size();
    return c;
}

Eigen::VectorXd FeedForwardNet::params() const {
    Eigen::VectorXd p(param_count());
    Eigen::Index at = 0;
    for (int l = 0; l < layer_count(); ++l) {
        const auto& W = weights_[l];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) p(at++) = W(r, c);
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) p(at++) = biases_[l](i);
    }
    return p;
}

void FeedForwardNet::set_params(const Eigen::VectorXd& p) {
    if (p.size() != param_count()) throw ConfigError("parameter vector length mismatch");
    Eigen::Index at = 0;
    for (int l = 0; l < layer_count(); ++l) {
        auto& W = weights_[l];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = p(at++);
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = p(at++);
    }
}

Eigen::MatrixXd FeedForwardNet::forward(const Eigen::MatrixXd& X) const {
    if (X.cols() != in_) throw ConfigError("input dimension mismatch");
    Eigen::MatrixXd h = X;
    for (int l = 0; l < layer_count(); ++l) {
        Eigen::MatrixXd z = (h * weights_[l].transpose()).rowwise() + biases_[l].transpose();
        if (l + 1 < layer_count()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

FeedForwardNet::Cache FeedForwardNet::forward_cached(const Eigen::MatrixXd& X) const {
    if (X.cols() != in_) throw ConfigError("input dimension mismatch");
    Cache cache;
    cache.acts.reserve(layer_count() + 1);
    cache.acts.push_back(X);
    for (int l = 0; l < layer_count(); ++l) {
        Eigen::MatrixXd z = (cache.acts.back() * weights_[l].transpose()).rowwise() + biases_[l].transpose();
        if (l + 1 < layer_count()) z = z.cwiseMax(0.0);
        cache.acts.push_back(std::move(z));
    }
    return cache;
}

void FeedForwardNet::backward_into(const Cache& cache, const Eigen::MatrixXd& d_out,
                                   std::vector<Eigen::MatrixXd>& dW,
                                   std::vector<Eigen::VectorXd>& db) const {
    const int L = layer_count();
    dW.resize(L);
    db.resize(L);
    Eigen::MatrixXd delta = d_out;
    for (int l = L - 1; l >= 0; --l) {
        dW[l] = delta.transpose() * cache.acts[static_cast<std::size_t>(l)];
        db[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            // ReLU mask from the stored post-activation.
            delta = (delta * weights_[l]).cwiseProduct(
                (cache.acts[static_cast<std::size_t>(l)].array() > 0.0).cast<double>().matrix());
        }
    }
}

Eigen::VectorXd FeedForwardNet::backward(const Cache& cache, const Eigen::MatrixXd& d_out) const {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    backward_into(cache, d_out, dW, db);
    Eigen::VectorXd g(param_count());
    Eigen::Index at = 0;
    for (int l = 0; l < layer_count(); ++l) {
        for (Eigen::Index r = 0; r < dW[l].rows(); ++r)
            for (Eigen::Index c = 0; c < dW[l].cols(); ++c) g(at++) = dW[l](r, c);
        for (Eigen::Index i = 0; i < db[l].size(); ++i) g(at++) = db[l](i);
    }
    return g;
}

void FeedForwardNet::step(const Cache& cache, const Eigen::MatrixXd& d_out, double lr) {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    backward_into(cache, d_out, dW, db);
    for (int l = 0; l < layer_count(); ++l) {
        weights_[l] -= lr * dW[l];
        biases_[l] -= lr * db[l];
    }
}

}  // namespace robustpolicy
