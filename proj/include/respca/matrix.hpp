#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace respca {

/// Dense d x n matrix of doubles, column-major. Columns are samples/frames,
/// rows are features/pixels. Constructors reject non-finite values.
class DenseMatrix {
public:
    DenseMatrix() = default;

    /// Zero-filled matrix.
    DenseMatrix(std::size_t rows, std::size_t cols);

    /// From column-major data; data.size() must equal rows*cols and all
    /// values must be finite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const {
        return data_[j * rows_ + i];
    }
    double& operator()(std::size_t i, std::size_t j) {
        return data_[j * rows_ + i];
    }

    std::span<const double> col(std::size_t j) const {
        return {data_.data() + j * rows_, rows_};
    }
    std::span<double> col(std::size_t j) {
        return {data_.data() + j * rows_, rows_};
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    /// True if every entry is finite.
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Partition of n columns into c non-empty groups; labels[j] in {0,..,c-1}.
class GroupAssignment {
public:
    GroupAssignment() = default;

    /// Validates that every group in {0,..,c-1} is non-empty and labels are
    /// in range.
    GroupAssignment(std::vector<std::size_t> labels, std::size_t c);

    std::size_t size() const { return labels_.size(); }
    std::size_t groups() const { return c_; }
    std::size_t label(std::size_t j) const { return labels_[j]; }
    const std::vector<std::size_t>& labels() const { return labels_; }

    /// Column indices of each group, in ascending order.
    std::vector<std::vector<std::size_t>> group_indices() const;

    /// Number of columns in each group.
    std::vector<std::size_t> group_sizes() const;

private:
    std::vector<std::size_t> labels_;
    std::size_t c_ = 0;
};

/// Mean of the selected columns. Errors on an empty index set.
std::vector<double> column_mean(const DenseMatrix& m,
                                std::span<const std::size_t> columns);

/// Within-group scatter: sum over groups of squared distances from each
/// column to its group mean. The RES-PCA low-rank objective term.
double group_scatter(const DenseMatrix& m, const GroupAssignment& g);

double frob_norm(const DenseMatrix& m);

/// Sum of absolute values of all entries.
double elementwise_l1(const DenseMatrix& m);

/// Sum of column-wise l2 norms.
double l21_norm(const DenseMatrix& m);

/// Per-column l2 norms.
std::vector<double> column_l2_norms(const DenseMatrix& m);

}  // namespace respca
