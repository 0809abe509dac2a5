#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace robustpolicy {

struct Sample {
    double y;
    int a;
    Eigen::VectorXd x;
};

// Columnar record store; sample index is identity. Invariants: nonempty for
// use in estimation, y finite, 0 <= a < d_a, covariates finite.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::VectorXi a;
    Eigen::MatrixXd x;  // n rows, d_x columns
    int d_a = 2;

    int n() const { return static_cast<int>(y.size()); }
    int d_x() const { return static_cast<int>(x.cols()); }

    Sample sample(int i) const { return Sample{y(i), a(i), x.row(i).transpose()}; }

    // Throws DataError naming the first offending row.
    void validate() const;
};

// Header must be exactly y,a,x0,...,x{d_x-1}; '.' decimal; no gaps.
Dataset load_csv(const std::string& path, int d_a);
void save_csv(const Dataset& data, const std::string& path);

// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);
double parse_double(const std::string& s);  // throws DataError on garbage

// Seeded disjoint partition: first fold has ceil(rho*n) rows. Row order
// within each fold follows the original dataset (indices sorted ascending).
std::pair<Dataset, Dataset> split(const Dataset& data, double rho, std::uint64_t seed);

// Row subset in the given index order.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx);

}  // namespace robustpolicy
