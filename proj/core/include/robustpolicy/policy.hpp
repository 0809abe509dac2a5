#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>

#include "robustpolicy/net.hpp"

namespace robustpolicy {

// pi(a|x) = softmax(s(x))_a for a score network s: R^{d_x} -> R^{d_a}.
// Every probability is strictly positive and rows sum to 1.
class SoftmaxPolicy {
public:
    SoftmaxPolicy() = default;

    static SoftmaxPolicy linear(int d_x, int d_a, std::uint64_t seed);
    static SoftmaxPolicy mlp(int d_x, const std::vector<int>& hidden, int d_a, std::uint64_t seed,
                             InitScheme scheme = InitScheme::TinyUniform,
                             double x_lo = -1.0, double x_hi = 1.0);

    int d_x() const { return net_.input_dim(); }
    int d_a() const { return net_.output_dim(); }
    bool is_linear() const { return net_.hidden().empty(); }
    const FeedForwardNet& net() const { return net_; }

    Eigen::VectorXd scores(const Eigen::VectorXd& x) const;
    Eigen::VectorXd probs(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd probs_batch(const Eigen::MatrixXd& X) const;  // n x d_a

    Eigen::VectorXd params() const { return net_.params(); }
    void set_params(const Eigen::VectorXd& p) { net_.set_params(p); }
    Eigen::Index param_count() const { return net_.param_count(); }

    // d(sum_i sum_a dS(i,a) * s_a(x_i))/d(theta): backprop of a score-space
    // gradient through the network.
    Eigen::VectorXd grad_from_score_grad(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dS) const;

    // Full Jacobian d pi(.|x) / d theta (d_a rows, param_count cols).
    // Chain rule through d pi_a / d s_b = pi_a (1{a=b} - pi_b).
    Eigen::MatrixXd policy_jacobian(const Eigen::VectorXd& x) const;

    void save(const std::string& path) const;
    static SoftmaxPolicy load(const std::string& path);

private:
    FeedForwardNet net_;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores);

// Frozen comparator: uniform, a fixed probability vector, or a frozen
// softmax policy.
class BaselinePolicy {
public:
    static BaselinePolicy uniform(int d_a);
    static BaselinePolicy constant(const Eigen::VectorXd& probs);
    static BaselinePolicy frozen(SoftmaxPolicy policy);

    int d_a() const;
    Eigen::VectorXd probs(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd probs_batch(const Eigen::MatrixXd& X) const;

private:
    struct Uniform {
        int d_a;
    };
    std::variant<Uniform, Eigen::VectorXd, SoftmaxPolicy> impl_{Uniform{2}};
};

}  // namespace robustpolicy
