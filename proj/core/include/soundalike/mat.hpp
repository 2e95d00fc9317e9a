#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace soundalike {

// Dense row-major matrix of doubles. Rows are the contiguous unit; every
// summation over a row runs in ascending index order, which is the
// documented reduction order for all numeric kernels built on top.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// a . b over ascending index
double dot(std::span<const double> a, std::span<const double> b);

double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);

bool all_finite(const Mat& m);
bool all_finite(std::span<const double> v);

} // namespace soundalike
