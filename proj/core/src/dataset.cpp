#include "robustpolicy/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw DataError("non-numeric cell '" + s + "'");
    }
    return v;
}

void Dataset::validate() const {
    if (n() == 0) throw DataError("dataset is empty");
    if (d_a < 2) throw DataError("treatment arity must be >= 2");
    if (d_x() < 1) throw DataError("covariate dimension must be >= 1");
    if (a.size() != n() || x.rows() != n()) throw DataError("dataset column lengths disagree");
    for (int i = 0; i < n(); ++i) {
        if (!std::isfinite(y(i))) throw DataError("non-finite outcome, row " + std::to_string(i));
        if (a(i) < 0 || a(i) >= d_a) throw DataError("treatment out of range, row " + std::to_string(i));
        for (int j = 0; j < d_x(); ++j) {
            if (!std::isfinite(x(i, j))) throw DataError("non-finite covariate, row " + std::to_string(i));
        }
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Dataset load_csv(const std::string& path, int d_a) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    strip_cr(line);
    auto header = split_line(line);
    if (header.size() < 3 || header[0] != "y" || header[1] != "a") {
        throw DataError("bad header, expected y,a,x0,...: '" + line + "'");
    }
    int d_x = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < d_x; ++j) {
        if (header[j + 2] != "x" + std::to_string(j)) {
            throw DataError("bad header column " + std::to_string(j + 2) + ": expected x" + std::to_string(j));
        }
    }

    std::vector<double> ys;
    std::vector<int> as;
    std::vector<double> xs;
    int row = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() && in.eof()) break;
        auto cells = split_line(line);
        if (static_cast<int>(cells.size()) != d_x + 2) {
            throw DataError("wrong column count, row " + std::to_string(row + 1));
        }
        double y;
        try {
            y = parse_double(cells[0]);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + ", row " + std::to_string(row + 1));
        }
        double a_raw;
        try {
            a_raw = parse_double(cells[1]);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + ", row " + std::to_string(row + 1));
        }
        int a = static_cast<int>(a_raw);
        if (a_raw != static_cast<double>(a)) {
            throw DataError("treatment not an integer, row " + std::to_string(row + 1));
        }
        if (a < 0 || a >= d_a) {
            throw DataError("treatment out of range, row " + std::to_string(row + 1));
        }
        ys.push_back(y);
        as.push_back(a);
        for (int j = 0; j < d_x; ++j) {
            try {
                xs.push_back(parse_double(cells[j + 2]));
            } catch (const DataError& e) {
                throw DataError(std::string(e.what()) + ", row " + std::to_string(row + 1));
            }
        }
        ++row;
    }
    if (row == 0) throw DataError("no data rows in '" + path + "'");

    Dataset data;
    data.d_a = d_a;
    data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), row);
    data.a = Eigen::Map<Eigen::VectorXi>(as.data(), row);
    data.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), row, d_x);
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "y,a";
    for (int j = 0; j < data.d_x(); ++j) out << ",x" << j;
    out << "\n";
    for (int i = 0; i < data.n(); ++i) {
        out << format_double(data.y(i)) << ',' << data.a(i);
        for (int j = 0; j < data.d_x(); ++j) out << ',' << format_double(data.x(i, j));
        out << "\n";
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.d_a = data.d_a;
    int m = static_cast<int>(idx.size());
    out.y.resize(m);
    out.a.resize(m);
    out.x.resize(m, data.d_x());
    for (int i = 0; i < m; ++i) {
        out.y(i) = data.y(static_cast<int>(idx[i]));
        out.a(i) = data.a(static_cast<int>(idx[i]));
        out.x.row(i) = data.x.row(static_cast<int>(idx[i]));
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double rho, std::uint64_t seed) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("split fraction must lie in (0,1)");
    int n = data.n();
    if (n < 2) throw DataError("cannot split a dataset with fewer than 2 rows");
    auto m = static_cast<std::size_t>(std::ceil(rho * n));
    RandomStream rng(seed);
    auto perm = rng.permutation(static_cast<std::size_t>(n));
    std::vector<std::size_t> first(perm.begin(), perm.begin() + m);
    std::vector<std::size_t> second(perm.begin() + m, perm.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {subset(data, first), subset(data, second)};
}

}  // namespace robustpolicy
