#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tanhseed {

// Dense row-major matrix of doubles. Shapes are fixed at construction;
// all binary kernels validate dimensions and throw std::invalid_argument.
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

namespace detail {
inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

// C += A * B. The ikj loop order keeps the inner loop contiguous in both B
// and C so the compiler can vectorize it; on one AVX2 core this sustains
// several Gflop/s, which the deep-propagation and PINN paths depend on.
inline void matmul_acc(const Mat& a, const Mat& b, Mat& c) {
    detail::require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
                    "matmul_acc: shape mismatch");
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
}

// C += A * B^T. Dot-product form; used by backward passes to avoid
// materializing transposes.
inline void matmul_nt_acc(const Mat& a, const Mat& b, Mat& c) {
    detail::require(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
                    "matmul_nt_acc: shape mismatch");
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] += s;
        }
    }
}

// C += A^T * B.
inline void matmul_tn_acc(const Mat& a, const Mat& b, Mat& c) {
    detail::require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
                    "matmul_tn_acc: shape mismatch");
    const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a.row(p);
        const double* bp = b.row(p);
        for (std::size_t i = 0; i < n; ++i) {
            const double api = ap[i];
            double* ci = c.row(i);
            for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
        }
    }
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows(), b.cols());
    matmul_acc(a, b, c);
    return c;
}

}  // namespace tanhseed
