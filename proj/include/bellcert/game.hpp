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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellcert/core.hpp"

namespace bellcert {

inline constexpr int kMaxGameSettings = 20;
inline constexpr int kMaxBruteForceSettings = 12;

using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Combinatorics of the n-setting functional.
///
/// Row x holds the bit string z^x. The first bit is always 0 and the
/// remaining n-1 bits enumerate {0,1}^{n-1} in lexicographic order, so row x
/// is simply the binary expansion of x (most significant bit in column 1).
struct GameSpec {
    int n = 0;
    SignMatrix bitstrings;  // 2^{n-1} x n, entries in {0,1}
    SignMatrix signs;       // 2^{n-1} x n, entries (-1)^{z^x_y}

    std::int64_t rows() const { return static_cast<std::int64_t>(signs.rows()); }
    int sign(std::int64_t x, int y) const { return signs(x, y); }
};

/// Bell functional bounds for a given n.
struct BoundReport {
    int n = 0;
    std::uint64_t local_bound = 0;
    double quantum_bound = 0.0;
    double ratio = 0.0;
};

inline GameSpec build_game(int n) {
    if (n < 2 || n > kMaxGameSettings) {
        throw InvalidParameter("build_game: n must be in [2, " + std::to_string(kMaxGameSettings) +
                               "], got " + std::to_string(n));
    }
    GameSpec g;
    g.n = n;
    const auto rows = static_cast<Eigen::Index>(pow2(n - 1));
    g.bitstrings.resize(rows, n);
    g.signs.resize(rows, n);
    for (Eigen::Index x = 0; x < rows; ++x) {
        g.bitstrings(x, 0) = 0;
        for (int y = 1; y < n; ++y) {
            g.bitstrings(x, y) = static_cast<std::int8_t>((x >> (n - 1 - y)) & 1);
        }
    }
    g.signs = (1 - 2 * g.bitstrings.array()).matrix();
    return g;
}

/// Number of unordered pairs y < y'.
constexpr int pair_count(int n) { return n * (n - 1) / 2; }

/// Column index of the pair (y, y'), y < y', in row-major order.
constexpr int pair_index(int n, int y, int yp) {
    // pairs (0,1..n-1), (1,2..n-1), ...
    return y * n - y * (y + 1) / 2 + (yp - y - 1);
}

/// Inverse of pair_index.
inline std::pair<int, int> pair_of(int n, int p) {
    for (int y = 0; y < n; ++y) {
        const int row = n - 1 - y;
        if (p < row) return {y, y + 1 + p};
        p -= row;
    }
    throw InvalidParameter("pair_of: index out of range");
}

/// Sigma_x signs(x,y) * signs(x,y') for every y <= y', in row-major order
/// ((0,0), (0,1), ..., (0,n-1), (1,1), ...). Length n(n-1)/2 + n.
inline std::vector<std::int64_t> walsh_column_sums(const GameSpec& g) {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(pair_count(g.n) + g.n));
    for (int y = 0; y < g.n; ++y) {
        for (int yp = y; yp < g.n; ++yp) {
            std::int64_t s = 0;
            for (std::int64_t x = 0; x < g.rows(); ++x) s += g.sign(x, y) * g.sign(x, yp);
            out.push_back(s);
        }
    }
    return out;
}

/// Index of (y, y') with y <= y' inside the walsh_column_sums vector.
constexpr int walsh_sum_index(int n, int y, int yp) {
    return y * n - y * (y - 1) / 2 + (yp - y);
}

/// Pair-coefficient matrix C(x, p) = signs(x,y) * signs(x,y') for p = (y,y').
inline SignMatrix pair_coefficients(const GameSpec& g) {
    SignMatrix c(g.rows(), pair_count(g.n));
    for (int y = 0; y < g.n; ++y) {
        for (int yp = y + 1; yp < g.n; ++yp) {
            const int p = pair_index(g.n, y, yp);
            for (std::int64_t x = 0; x < g.rows(); ++x) {
                c(x, p) = static_cast<std::int8_t>(g.sign(x, y) * g.sign(x, yp));
            }
        }
    }
    return c;
}

/// Exact Gram matrix C^T C of the pair coefficients.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> pair_coefficient_gram(const GameSpec& g) {
    const SignMatrix c = pair_coefficients(g);
    const int p = pair_count(g.n);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> gram(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            std::int64_t s = 0;
            for (std::int64_t x = 0; x < g.rows(); ++x) s += c(x, i) * c(x, j);
            gram(i, j) = s;
            gram(j, i) = s;
        }
    }
    return gram;
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticError("integer overflow in local bound");
    return r;
}

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        // r * (n-k+i) is divisible by i at every step.
        r = checked_mul(r, static_cast<std::uint64_t>(n - k + i)) / static_cast<std::uint64_t>(i);
    }
    return r;
}

}  // namespace detail

/// (floor(n/2)+1) * C(n, floor(n/2)+1), exact.
inline std::uint64_t local_bound_formula(int n) {
    if (n < 2) throw InvalidParameter("local_bound_formula: n must be >= 2");
    if (n > 60) throw ArithmeticError("local_bound_formula: n too large for 64-bit arithmetic");
    const int h = n / 2 + 1;
    return detail::checked_mul(static_cast<std::uint64_t>(h), detail::binomial(n, h));
}

/// Exhaustive maximum over Bob's deterministic assignments, with Alice
/// answering optimally (|.| per row).
inline std::uint64_t local_bound_bruteforce(const GameSpec& g) {
    if (g.n > kMaxBruteForceSettings) {
        throw ResourceLimit("local_bound_bruteforce: n > " + std::to_string(kMaxBruteForceSettings));
    }
    const std::uint64_t assignments = pow2(g.n);
    std::int64_t best = 0;
    std::vector<int> b(static_cast<std::size_t>(g.n));
    for (std::uint64_t mask = 0; mask < assignments; ++mask) {
        for (int y = 0; y < g.n; ++y) b[static_cast<std::size_t>(y)] = ((mask >> y) & 1) ? -1 : 1;
        std::int64_t total = 0;
        for (std::int64_t x = 0; x < g.rows(); ++x) {
            std::int64_t row = 0;
            for (int y = 0; y < g.n; ++y) row += g.sign(x, y) * b[static_cast<std::size_t>(y)];
            total += std::llabs(row);
        }
        best = std::max(best, total);
    }
    return static_cast<std::uint64_t>(best);
}

inline double quantum_bound(int n) {
    return static_cast<double>(pow2(n - 1)) * std::sqrt(static_cast<double>(n));
}

inline BoundReport bound_report(int n) {
    BoundReport r;
    r.n = n;
    r.local_bound = local_bound_formula(n);
    r.quantum_bound = quantum_bound(n);
    r.ratio = r.quantum_bound / static_cast<double>(r.local_bound);
    return r;
}

inline constexpr int kMaxPseudoinverseSettings = 12;

/// Dense Moore-Penrose pseudoinverse of the pair-coefficient matrix.
inline RMatrix sign_pseudoinverse(const GameSpec& g) {
    if (g.n > kMaxPseudoinverseSettings) {
        throw ResourceLimit("sign_pseudoinverse: n > " + std::to_string(kMaxPseudoinverseSettings));
    }
    const RMatrix c = pair_coefficients(g).cast<double>();
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(c);
    if (cod.rank() != c.cols()) {
        throw InvariantViolation("pair-coefficient matrix is rank deficient");
    }
    return cod.pseudoInverse();
}

/// K_n = ||C^+||_{inf->inf}, the maximum absolute row sum of C^+.
///
/// Computed from a numerical pseudoinverse for n <= 12. Above that the
/// columns of C are orthogonal with squared norm 2^{n-1} (checked exactly for
/// every n the dense path covers), so C^+ = C^T / 2^{n-1} and each row of C^+
/// has 2^{n-1} entries of magnitude 2^{1-n}.
inline double sign_pseudoinverse_norm(const GameSpec& g) {
    if (g.n <= kMaxPseudoinverseSettings) {
        return sign_pseudoinverse(g).cwiseAbs().rowwise().sum().maxCoeff();
    }
    const double rows = static_cast<double>(g.rows());
    return rows * (1.0 / rows);
}

}  // namespace bellcert
