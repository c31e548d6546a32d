#include "respca/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace respca {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("DenseMatrix: data size does not match dimensions");
    }
    if (!all_finite()) {
        throw std::invalid_argument("DenseMatrix: non-finite value in input");
    }
}

bool DenseMatrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

GroupAssignment::GroupAssignment(std::vector<std::size_t> labels, std::size_t c)
    : labels_(std::move(labels)), c_(c) {
    if (c == 0) throw std::invalid_argument("GroupAssignment: c must be >= 1");
    std::vector<bool> seen(c, false);
    for (std::size_t l : labels_) {
        if (l >= c) throw std::invalid_argument("GroupAssignment: label out of range");
        seen[l] = true;
    }
    for (std::size_t i = 0; i < c; ++i) {
        if (!seen[i]) throw std::invalid_argument("GroupAssignment: empty group");
    }
}

std::vector<std::vector<std::size_t>> GroupAssignment::group_indices() const {
    std::vector<std::vector<std::size_t>> idx(c_);
    for (std::size_t j = 0; j < labels_.size(); ++j) {
        idx[labels_[j]].push_back(j);
    }
    return idx;
}

std::vector<std::size_t> GroupAssignment::group_sizes() const {
    std::vector<std::size_t> sizes(c_, 0);
    for (std::size_t l : labels_) ++sizes[l];
    return sizes;
}

std::vector<double> column_mean(const DenseMatrix& m,
                                std::span<const std::size_t> columns) {
    if (columns.empty()) {
        throw std::invalid_argument("column_mean: empty column set");
    }
    std::vector<double> mean(m.rows(), 0.0);
    for (std::size_t j : columns) {
        if (j >= m.cols()) {
            throw std::invalid_argument("column_mean: column index out of range");
        }
        auto c = m.col(j);
        for (std::size_t i = 0; i < m.rows(); ++i) mean[i] += c[i];
    }
    const double inv = 1.0 / static_cast<double>(columns.size());
    for (double& v : mean) v *= inv;
    return mean;
}

double group_scatter(const DenseMatrix& m, const GroupAssignment& g) {
    if (g.size() != m.cols()) {
        throw std::invalid_argument("group_scatter: assignment length != column count");
    }
    double total = 0.0;
    for (const auto& members : g.group_indices()) {
        const auto mean = column_mean(m, members);
        for (std::size_t j : members) {
            auto c = m.col(j);
            for (std::size_t i = 0; i < m.rows(); ++i) {
                const double dlt = c[i] - mean[i];
                total += dlt * dlt;
            }
        }
    }
    return total;
}

double frob_norm(const DenseMatrix& m) {
    double sq = 0.0;
    for (double v : m.data()) sq += v * v;
    return std::sqrt(sq);
}

double elementwise_l1(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += std::abs(v);
    return s;
}

double l21_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : column_l2_norms(m)) s += v;
    return s;
}

std::vector<double> column_l2_norms(const DenseMatrix& m) {
    std::vector<double> norms(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double sq = 0.0;
        for (double v : m.col(j)) sq += v * v;
        norms[j] = std::sqrt(sq);
    }
    return norms;
}

}  // namespace respca
