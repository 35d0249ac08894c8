#pragma once

// Dense row-major matrices and CSR sparse matrices in double precision.
// Only the kernels the GCN training loop needs — nothing generic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ltlp {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.row(k).data();
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: shape mismatch");
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = a.row(k).data();
        const double* bk = b.row(k).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row(i).data();
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: shape mismatch");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j).data();
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            c(i, j) = s;
        }
    }
    return c;
}

// CSR with per-entry coefficients; used for the normalized adjacency and for
// node feature matrices (features in this domain are typically very sparse).
struct SparseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> offsets{0}; // length rows+1
    std::vector<std::uint32_t> col_index;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }
};

// Y = S * D
inline Matrix spmm(const SparseMatrix& s, const Matrix& d) {
    if (s.cols != d.rows()) throw std::invalid_argument("spmm: shape mismatch");
    Matrix y(s.rows, d.cols());
    for (std::size_t i = 0; i < s.rows; ++i) {
        double* yi = y.row(i).data();
        for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e) {
            const double w = s.values[e];
            const double* dk = d.row(s.col_index[e]).data();
            for (std::size_t j = 0; j < d.cols(); ++j) yi[j] += w * dk[j];
        }
    }
    return y;
}

// Y = S^T * D
inline Matrix spmm_transposed(const SparseMatrix& s, const Matrix& d) {
    if (s.rows != d.rows()) throw std::invalid_argument("spmm_transposed: shape mismatch");
    Matrix y(s.cols, d.cols());
    for (std::size_t i = 0; i < s.rows; ++i) {
        const double* di = d.row(i).data();
        for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e) {
            const double w = s.values[e];
            double* yk = y.row(s.col_index[e]).data();
            for (std::size_t j = 0; j < d.cols(); ++j) yk[j] += w * di[j];
        }
    }
    return y;
}

// C = A * B, both sparse. Row-wise with a dense accumulator.
inline SparseMatrix spsp(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("spsp: shape mismatch");
    SparseMatrix c;
    c.rows = a.rows;
    c.cols = b.cols;
    c.offsets.assign(1, 0);
    std::vector<double> acc(b.cols, 0.0);
    std::vector<char> seen(b.cols, 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t i = 0; i < a.rows; ++i) {
        touched.clear();
        for (std::size_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
            const double w = a.values[e];
            const std::size_t k = a.col_index[e];
            for (std::size_t f = b.offsets[k]; f < b.offsets[k + 1]; ++f) {
                const std::uint32_t j = b.col_index[f];
                if (!seen[j]) {
                    seen[j] = 1;
                    touched.push_back(j);
                }
                acc[j] += w * b.values[f];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::uint32_t j : touched) {
            c.col_index.push_back(j);
            c.values.push_back(acc[j]);
            acc[j] = 0.0;
            seen[j] = 0;
        }
        c.offsets.push_back(c.col_index.size());
    }
    return c;
}

inline Matrix to_dense(const SparseMatrix& s) {
    Matrix d(s.rows, s.cols);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e)
            d(i, s.col_index[e]) += s.values[e];
    return d;
}

inline SparseMatrix to_sparse(const Matrix& d) {
    SparseMatrix s;
    s.rows = d.rows();
    s.cols = d.cols();
    s.offsets.assign(1, 0);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            if (d(i, j) != 0.0) {
                s.col_index.push_back(static_cast<std::uint32_t>(j));
                s.values.push_back(d(i, j));
            }
        }
        s.offsets.push_back(s.col_index.size());
    }
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace ltlp
