// Independent reference implementations used as test oracles. Written
// directly from the definitions with plain loops and no library kernels.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hkidqg/matrix.hpp"

namespace oracle {

using hkidqg::Matrix;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
            c(i, j) = static_cast<double>(s);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// exp-normalize at extended precision.
inline std::vector<double> softmax(const std::vector<double>& x) {
    long double mx = x[0];
    for (double v : x) mx = std::max<long double>(mx, v);
    long double z = 0;
    for (double v : x) z += std::exp(static_cast<long double>(v) - mx);
    std::vector<double> out;
    for (double v : x) out.push_back(static_cast<double>(std::exp(static_cast<long double>(v) - mx) / z));
    return out;
}

inline Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<double> row(m.row(i).begin(), m.row(i).end());
        const auto s = oracle::softmax(row);
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = s[j];
    }
    return out;
}

inline Matrix softmax_cols(const Matrix& m) { return oracle::transpose(oracle::softmax_rows(oracle::transpose(m))); }

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    long double d = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d += static_cast<long double>(u[i]) * v[i];
        nu += static_cast<long double>(u[i]) * u[i];
        nv += static_cast<long double>(v[i]) * v[i];
    }
    if (nu == 0 || nv == 0) return 0.0;
    return static_cast<double>(d / std::sqrt(nu * nv));
}

// Full fusion forward pass from the defining formulas.
inline Matrix fusion(const Matrix& x_v, const Matrix& h_t, const Matrix& w_h, const Matrix& w_t,
                     const Matrix& w_v) {
    const Matrix h_v = oracle::matmul(x_v, w_h);
    Matrix s = oracle::matmul(h_t, oracle::transpose(h_v));
    const double k = 1.0 / std::sqrt(static_cast<double>(h_t.cols()));
    for (double& v : s.data()) v *= k;
    const Matrix a = oracle::matmul(oracle::softmax_rows(s), h_v);
    const Matrix l1 = oracle::matmul(h_t, w_t), l2 = oracle::matmul(a, w_v);
    Matrix f(h_t.rows(), h_t.cols());
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j)
            f(i, j) = h_t(i, j) + std::tanh(l1(i, j) + l2(i, j)) * a(i, j);
    return f;
}

struct AdamRef {
    double b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.01;
    std::vector<double> m, v;
    int t = 0;

    void step(std::vector<double>& p, const std::vector<double>& g, double lr) {
        if (m.empty()) m.assign(p.size(), 0.0), v.assign(p.size(), 0.0);
        ++t;
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = p[i] - lr * wd * p[i];
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(b1, t));
            const double vh = v[i] / (1 - std::pow(b2, t));
            p[i] = p[i] - lr * mh / (std::sqrt(vh) + eps);
        }
    }
};

}  // namespace oracle
