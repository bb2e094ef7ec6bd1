#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hkidqg {

/// Dense row-major matrix of doubles. Each row is one token, patch or
/// sentence embedding; the column count is the embedding width.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix row_vector(std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool all_finite() const noexcept;
    std::string shape_str() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using EmbeddingMatrix = Matrix;
using Vector = std::vector<double>;

enum class Axis { rows, cols };

Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Softmax along `axis`: Axis::rows normalizes each row, Axis::cols each
/// column. Max-subtracted, so any finite input is safe.
Matrix softmax_axis(const Matrix& m, Axis axis);

Matrix tanh(const Matrix& m);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

/// Mean over rows; a 0-row matrix yields a zero vector of width cols.
Vector mean_rows(const Matrix& m);

/// Cosine similarity; 0.0 if either vector has zero norm.
double cosine_sim(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> u, std::span<const double> v);

/// Row vector times matrix: v (1 x m.rows) * m -> (1 x m.cols).
Vector vec_matmul(std::span<const double> v, const Matrix& m);

void check_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace hkidqg
