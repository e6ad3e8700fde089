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
#include <vector>

#include "bellcert/clifford.hpp"

namespace bellcert {

/// sum_y signs(x, y) B_y, Bob's combination paired with Alice's A_x.
inline Op bob_combination(const GameSpec& g, std::int64_t x, const std::vector<Op>& bob) {
    Op out = Op::Zero(bob.front().rows(), bob.front().cols());
    for (int y = 0; y < g.n; ++y) out += static_cast<double>(g.sign(x, y)) * bob[static_cast<std::size_t>(y)];
    return out;
}

struct BellOperator {
    GameSpec game;
    Op matrix;
    Eigen::Index dim_a = 0;
    Eigen::Index dim_b = 0;
};

inline BellOperator bell_operator(const GameSpec& g, const std::vector<Op>& alice, const std::vector<Op>& bob) {
    if (static_cast<std::int64_t>(alice.size()) != g.rows() || static_cast<int>(bob.size()) != g.n) {
        throw InvalidParameter("bell_operator: expected 2^{n-1} Alice and n Bob observables");
    }
    const Eigen::Index da = alice.front().rows();
    const Eigen::Index db = bob.front().rows();
    for (const auto& a : alice) {
        if (a.rows() != da || a.cols() != da) throw InvalidParameter("bell_operator: Alice dimension mismatch");
    }
    for (const auto& b : bob) {
        if (b.rows() != db || b.cols() != db) throw InvalidParameter("bell_operator: Bob dimension mismatch");
    }
    if (da * db > kMaxDenseDim) throw ResourceLimit("bell_operator: joint dimension too large");
    BellOperator out{g, Op::Zero(da * db, da * db), da, db};
    for (std::int64_t x = 0; x < g.rows(); ++x) {
        out.matrix += tensor(alice[static_cast<std::size_t>(x)], bob_combination(g, x, bob));
    }
    return out;
}

inline BellOperator bell_operator(const Strategy& s) { return bell_operator(s.game, s.alice_obs, s.bob_obs); }

/// Imaginary parts of expectation values above this are reported as
/// inconsistent input.
inline constexpr double kImagResidueTol = 1e-10;

/// 2^{n-1} x n table of <A_x (x) B_y>.
inline RMatrix correlators(const Strategy& s) {
    check_shape(s);
    const CMatrix m = unvec(s.state);
    RMatrix table(s.game.rows(), s.game.n);
    for (std::int64_t x = 0; x < s.game.rows(); ++x) {
        const CMatrix left = m.adjoint() * s.alice_obs[static_cast<std::size_t>(x)] * m;
        for (int y = 0; y < s.game.n; ++y) {
            const Complex v = (left.array() * s.bob_obs[static_cast<std::size_t>(y)].array()).sum();
            if (std::abs(v.imag()) > kImagResidueTol * std::max(1.0, std::abs(v))) {
                throw PreconditionError("correlators: complex expectation value, observables not Hermitian?");
            }
            table(x, y) = v.real();
        }
    }
    return table;
}

/// <psi| G_n |psi>.
inline double bell_value(const Strategy& s) {
    check_shape(s);
    const CMatrix m = unvec(s.state);
    Complex total = 0.0;
    for (std::int64_t x = 0; x < s.game.rows(); ++x) {
        const CMatrix left = m.adjoint() * s.alice_obs[static_cast<std::size_t>(x)] * m;
        total += (left.array() * bob_combination(s.game, x, s.bob_obs).array()).sum();
    }
    if (std::abs(total.imag()) > kImagResidueTol * std::max(1.0, std::abs(total))) {
        throw PreconditionError("bell_value: complex Bell value, observables not Hermitian?");
    }
    return total.real();
}

inline constexpr Eigen::Index kMaxSpectralDim = 4096;

/// Largest eigenvalue of the Bell operator: the optimum over states for
/// these fixed observables.
inline double spectral_quantum_value(const BellOperator& b) {
    if (b.matrix.rows() > kMaxSpectralDim) throw ResourceLimit("spectral_quantum_value: dimension above 4096");
    const Op sym = (b.matrix + b.matrix.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().maxCoeff();
}

// --- See-saw -------------------------------------------------------------------

struct SeesawOptions {
    int max_iters = 500;
    double rel_tol = 1e-10;
    int patience = 5;  // consecutive sweeps below rel_tol
};

struct SeesawResult {
    Strategy strategy;
    std::vector<double> trace;  // value after each half-step (Alice, Bob, state)
    bool converged = false;
    int sweeps = 0;
    double value = 0.0;
};

inline SeesawResult seesaw_optimize(const GameSpec& g, Eigen::Index dim_a, Eigen::Index dim_b, std::uint64_t seed,
                                    SeesawOptions opts = {}) {
    if (dim_a < 2 || dim_b < 2) throw InvalidParameter("seesaw_optimize: local dimensions must be >= 2");
    if (dim_a * dim_b > kMaxSpectralDim) throw ResourceLimit("seesaw_optimize: joint dimension above 4096");
    if (opts.max_iters < 1) throw InvalidParameter("seesaw_optimize: iteration budget must be positive");
    Rng rng(seed);
    Strategy s;
    s.game = g;
    for (int y = 0; y < g.n; ++y) s.bob_obs.push_back(hermitian_sign(rng.unit_hermitian(dim_b)));
    for (std::int64_t x = 0; x < g.rows(); ++x) s.alice_obs.push_back(hermitian_sign(rng.unit_hermitian(dim_a)));
    s.state.dim_a = dim_a;
    s.state.dim_b = dim_b;
    s.state.amplitudes = rng.unit_vector(dim_a * dim_b);

    SeesawResult res;
    res.trace.push_back(bell_value(s));
    int quiet = 0;
    double previous = res.trace.back();
    for (int it = 0; it < opts.max_iters; ++it) {
        CMatrix m = unvec(s.state);
        // Alice: maximise Tr(A_x E_x), E_x = M Bcal_x^T M^dag.
        for (std::int64_t x = 0; x < g.rows(); ++x) {
            const Op e = m * bob_combination(g, x, s.bob_obs).transpose() * m.adjoint();
            s.alice_obs[static_cast<std::size_t>(x)] = hermitian_sign(e);
        }
        res.trace.push_back(bell_value(s));
        // Bob: maximise Tr(B_y F_y^T), F_y = sum_x signs(x,y) M^dag A_x M.
        std::vector<Op> f(static_cast<std::size_t>(g.n), Op::Zero(dim_b, dim_b));
        for (std::int64_t x = 0; x < g.rows(); ++x) {
            const Op ax = m.adjoint() * s.alice_obs[static_cast<std::size_t>(x)] * m;
            for (int y = 0; y < g.n; ++y) f[static_cast<std::size_t>(y)] += static_cast<double>(g.sign(x, y)) * ax;
        }
        for (int y = 0; y < g.n; ++y) s.bob_obs[static_cast<std::size_t>(y)] = hermitian_sign(f[static_cast<std::size_t>(y)].transpose());
        res.trace.push_back(bell_value(s));
        // State: top eigenvector of the Bell operator.
        const HermitianEigen eig = eig_hermitian(bell_operator(s).matrix, 1e-8);
        s.state.amplitudes = eig.vectors.col(eig.vectors.cols() - 1);
        res.trace.push_back(bell_value(s));

        res.sweeps = it + 1;
        const double current = res.trace.back();
        if (std::abs(current - previous) <= opts.rel_tol * std::max(1.0, std::abs(current))) {
            if (++quiet >= opts.patience) {
                res.converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
        previous = current;
    }
    res.value = res.trace.back();
    res.strategy = std::move(s);
    return res;
}

}  // namespace bellcert
