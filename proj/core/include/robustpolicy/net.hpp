#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace robustpolicy {

enum class InitScheme {
    TinyUniform,   // every parameter ~ U(-0.01, 0.01)
    FanInUniform,  // per layer U(+-1/sqrt(fan_in)), the usual regression start
    KinkGrid,      // first layer: unit slopes with hinges on a covariate grid;
                   // hidden: He normal; final layer tiny uniform
};

// Fully connected ReLU net with a linear head. An empty hidden list is a
// plain linear map, so linear and MLP share one code path.
class FeedForwardNet {
public:
    FeedForwardNet() = default;
    FeedForwardNet(int in, std::vector<int> hidden, int out);

    // KinkGrid uses [x_lo, x_hi] to place first-layer hinges.
    void init(InitScheme scheme, std::uint64_t seed, double x_lo = -1.0, double x_hi = 1.0);

    int input_dim() const { return in_; }
    int output_dim() const { return out_; }
    const std::vector<int>& hidden() const { return hidden_; }
    int layer_count() const { return static_cast<int>(weights_.size()); }

    Eigen::Index param_count() const;
    Eigen::VectorXd params() const;          // per layer: W row-major, then b
    void set_params(const Eigen::VectorXd& p);

    // Rows of X are inputs; returns n x out.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

    struct Cache {
        std::vector<Eigen::MatrixXd> acts;  // acts[0] = X, acts[L] = output
    };
    Cache forward_cached(const Eigen::MatrixXd& X) const;

    // d(sum over batch of loss)/d(params) given d(loss)/d(output).
    Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& d_out) const;

    // In-place gradient step.
    void step(const Cache& cache, const Eigen::MatrixXd& d_out, double lr);

    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

private:
    int in_ = 0;
    int out_ = 0;
    std::vector<int> hidden_;
    std::vector<Eigen::MatrixXd> weights_;  // layer l: (dims[l+1] x dims[l])
    std::vector<Eigen::VectorXd> biases_;

    void backward_into(const Cache& cache, const Eigen::MatrixXd& d_out,
                       std::vector<Eigen::MatrixXd>& dW, std::vector<Eigen::VectorXd>& db) const;
};

}  // namespace robustpolicy
