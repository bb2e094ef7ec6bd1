#include "hkidqg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hkidqg/error.hpp"
#include "hkidqg/kernels.hpp"

namespace hkidqg {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw ShapeError("ragged rows in from_rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
}

Matrix Matrix::row_vector(std::span<const double> v) {
    return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << '(' << rows_ << " x " << cols_ << ')';
    return os.str();
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: cannot multiply " + a.shape_str() + " by " + b.shape_str());
    }
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out = c.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double s = a(i, p);
            if (s != 0.0) k.axpy(s, b.row(p).data(), out, b.cols());
        }
    }
    return c;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_transposed: cannot multiply " + a.shape_str() +
                         " by transpose of " + b.shape_str());
    }
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j)
            c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

namespace {

void softmax_inplace(std::span<double> x) {
    const auto& k = kernels::active();
    const double mx = k.max(x.data(), x.size());
    for (double& v : x) v = std::exp(v - mx);
    const double total = k.sum(x.data(), x.size());
    for (double& v : x) v /= total;
}

}  // namespace

Matrix softmax_axis(const Matrix& m, Axis axis) {
    if (m.empty()) throw ShapeError("softmax_axis: empty matrix " + m.shape_str());
    if (axis == Axis::rows) {
        Matrix out = m;
        for (std::size_t i = 0; i < out.rows(); ++i) softmax_inplace(out.row(i));
        return out;
    }
    Matrix t = transpose(m);
    for (std::size_t i = 0; i < t.rows(); ++i) softmax_inplace(t.row(i));
    return transpose(t);
}

Matrix tanh(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = std::tanh(v);
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix out = a;
    kernels::active().axpy(1.0, b.data().data(), out.data().data(), out.size());
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    kernels::active().scale(s, out.data().data(), out.size());
    return out;
}

Vector mean_rows(const Matrix& m) {
    Vector v(m.cols(), 0.0);
    if (m.rows() == 0) return v;
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < m.rows(); ++i) k.axpy(1.0, m.row(i).data(), v.data(), v.size());
    k.scale(1.0 / static_cast<double>(m.rows()), v.data(), v.size());
    return v;
}

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("dot: length mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    return kernels::active().dot(u.data(), v.data(), u.size());
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_sim: length mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    const auto& k = kernels::active();
    const double nu = std::sqrt(k.dot(u.data(), u.data(), u.size()));
    const double nv = std::sqrt(k.dot(v.data(), v.data(), v.size()));
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::clamp(k.dot(u.data(), v.data(), u.size()) / (nu * nv), -1.0, 1.0);
}

Vector vec_matmul(std::span<const double> v, const Matrix& m) {
    if (v.size() != m.rows()) {
        throw ShapeError("vec_matmul: vector of length " + std::to_string(v.size()) +
                         " cannot multiply " + m.shape_str());
    }
    const auto& k = kernels::active();
    Vector out(m.cols(), 0.0);
    for (std::size_t p = 0; p < v.size(); ++p)
        if (v[p] != 0.0) k.axpy(v[p], m.row(p).data(), out.data(), out.size());
    return out;
}

}  // namespace hkidqg
