// Copyright 2026 The bellcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference implementations used only by the tests. They are written with
// plain index loops so they share no code path with the library.

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

inline Mat sx() { Mat m(2, 2); m << 0, 1, 1, 0; return m; }
inline Mat sy() { Mat m(2, 2); m << 0, C(0, -1), C(0, 1), 0; return m; }
inline Mat sz() { Mat m(2, 2); m << 1, 0, 0, -1; return m; }
inline Mat id(Eigen::Index d) { return Mat::Identity(d, d); }

/// Sign (-1)^{z^x_y}: bit y of the n-bit string whose first bit is 0 and
/// whose remaining bits are the binary digits of x.
inline int sign(int n, std::int64_t x, int y) {
    if (y == 0) return 1;
    return ((x >> (n - 1 - y)) & 1) ? -1 : 1;
}

inline Vec column_vec(const Mat& m) {
    Vec v(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
    return v;
}

inline double expectation(const Vec& psi, const Mat& op) { return (psi.adjoint() * op * psi)(0, 0).real(); }

/// G_n assembled term by term from the Kronecker products.
inline Mat bell_operator(int n, const std::vector<Mat>& alice, const std::vector<Mat>& bob) {
    const Eigen::Index d = alice[0].rows() * bob[0].rows();
    Mat g = Mat::Zero(d, d);
    for (std::int64_t x = 0; x < (std::int64_t{1} << (n - 1)); ++x)
        for (int y = 0; y < n; ++y) g += static_cast<double>(sign(n, x, y)) * kron(alice[x], bob[y]);
    return g;
}

/// Local bound by enumerating every deterministic assignment of both parties.
inline std::int64_t local_bound_full(int n) {
    const std::int64_t rows = std::int64_t{1} << (n - 1);
    std::int64_t best = INT64_MIN;
    for (std::int64_t a = 0; a < (std::int64_t{1} << rows); ++a) {
        for (std::int64_t b = 0; b < (std::int64_t{1} << n); ++b) {
            std::int64_t v = 0;
            for (std::int64_t x = 0; x < rows; ++x) {
                const int ax = ((a >> x) & 1) ? -1 : 1;
                for (int y = 0; y < n; ++y) v += ax * sign(n, x, y) * (((b >> y) & 1) ? -1 : 1);
            }
            best = std::max(best, v);
        }
    }
    return best;
}

inline std::int64_t binomial(int n, int k) {
    std::vector<std::vector<std::int64_t>> t(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        t[i].assign(static_cast<std::size_t>(i + 1), 1);
        for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return (k < 0 || k > n) ? 0 : t[n][k];
}

/// Tr_B of a density matrix on C^{da} (x) C^{db}.
inline Mat trace_out_b(const Mat& rho, Eigen::Index da, Eigen::Index db) {
    Mat out = Mat::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            for (Eigen::Index k = 0; k < db; ++k) out(i, j) += rho(i * db + k, j * db + k);
    return out;
}

inline Mat trace_out_a(const Mat& rho, Eigen::Index da, Eigen::Index db) {
    Mat out = Mat::Zero(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
            for (Eigen::Index k = 0; k < da; ++k) out(i, j) += rho(k * db + i, k * db + j);
    return out;
}

inline Mat random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
    std::srand(seed);
    return Mat::Random(r, c);
}

inline Mat random_hermitian(Eigen::Index d, unsigned seed) {
    const Mat z = random_matrix(d, d, seed);
    return (z + z.adjoint()) * 0.5;
}

inline Vec random_state(Eigen::Index d, unsigned seed) {
    std::srand(seed);
    Vec v = Vec::Random(d);
    return v / v.norm();
}

}  // namespace oracle
