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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "bellcert/game.hpp"
#include "bellcert/opalg.hpp"
#include "bellcert/random.hpp"

namespace bellcert {

namespace pauli {

inline CMatrix I2() { return CMatrix::Identity(2, 2); }

inline CMatrix X() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline CMatrix Y() {
    CMatrix m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

inline CMatrix Z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

}  // namespace pauli

/// Largest n accepted by clifford_generators (m* = 1024).
inline constexpr int kMaxCliffordSettings = 20;

/// Dimension of the irreducible representation: 2^floor(n/2). This is the
/// same number as 2^ceil((n-1)/2) for every integer n.
constexpr std::int64_t clifford_dim(int n) { return std::int64_t{1} << (n / 2); }

/// n pairwise anticommuting Hermitian involutions on C^{m*}.
///
/// Bob's generators carry the minus signs, Alice's are their transposes.
struct CliffordBasis {
    int n = 0;
    std::int64_t m_star = 1;
    std::vector<Op> bob_gens;
    std::vector<Op> alice_gens;
};

namespace detail {

// Cl_1 = {[1]} and Cl_2 = {Z, -Y}; for k >= 3 prepend Z (x) I and -Y (x) I and
// put X in front of every generator of Cl_{k-2}.
inline std::vector<Op> bob_generators(int k) {
    if (k == 1) return {CMatrix::Identity(1, 1)};
    if (k == 2) return {pauli::Z(), (-pauli::Y()).eval()};
    const std::vector<Op> inner = bob_generators(k - 2);
    const Eigen::Index m = inner.front().rows();
    const CMatrix id = CMatrix::Identity(m, m);
    std::vector<Op> out;
    out.reserve(static_cast<std::size_t>(k));
    out.push_back(tensor(pauli::Z(), id));
    out.push_back(tensor((-pauli::Y()).eval(), id));
    for (const auto& g : inner) out.push_back(tensor(pauli::X(), g));
    return out;
}

}  // namespace detail

inline CliffordBasis clifford_generators(int n) {
    if (n < 2 || n > kMaxCliffordSettings) {
        throw InvalidParameter("clifford_generators: n must be in [2, " + std::to_string(kMaxCliffordSettings) + "]");
    }
    CliffordBasis basis;
    basis.n = n;
    basis.m_star = clifford_dim(n);
    basis.bob_gens = detail::bob_generators(n);
    for (const auto& g : basis.bob_gens) basis.alice_gens.push_back(g.transpose());
    return basis;
}

/// A state together with Alice's 2^{n-1} and Bob's n dichotomic observables.
struct Strategy {
    GameSpec game;
    Ket state;
    std::vector<Op> alice_obs;
    std::vector<Op> bob_obs;

    int n() const { return game.n; }
};

/// Largest residual of the Strategy invariants: Hermiticity, involution and
/// state normalization.
inline double strategy_defect(const Strategy& s) {
    double worst = std::abs(s.state.norm() - 1.0);
    for (const auto* side : {&s.alice_obs, &s.bob_obs}) {
        for (const auto& o : *side) worst = std::max({worst, hermitian_defect(o), involution_defect(o)});
    }
    return worst;
}

/// Throws InvalidParameter when counts or dimensions are inconsistent.
inline void check_shape(const Strategy& s) {
    const int n = s.game.n;
    if (static_cast<std::int64_t>(s.alice_obs.size()) != s.game.rows() ||
        static_cast<int>(s.bob_obs.size()) != n) {
        throw InvalidParameter("strategy: expected 2^{n-1} Alice and n Bob observables");
    }
    if (s.state.amplitudes.size() != s.state.dim_a * s.state.dim_b) {
        throw InvalidParameter("strategy: state amplitude count does not match its dimensions");
    }
    for (const auto& a : s.alice_obs) {
        if (a.rows() != s.state.dim_a || a.cols() != s.state.dim_a) {
            throw InvalidParameter("strategy: Alice observable dimension mismatch");
        }
    }
    for (const auto& b : s.bob_obs) {
        if (b.rows() != s.state.dim_b || b.cols() != s.state.dim_b) {
            throw InvalidParameter("strategy: Bob observable dimension mismatch");
        }
    }
}

/// Alice's observable for row x from a family of anticommuting generators:
/// (1/sqrt n) sum_y signs(x, y) gens[y].
inline Op hypercube_observable(const GameSpec& g, std::int64_t x, const std::vector<Op>& gens) {
    Op a = Op::Zero(gens.front().rows(), gens.front().cols());
    for (int y = 0; y < g.n; ++y) a += static_cast<double>(g.sign(x, y)) * gens[static_cast<std::size_t>(y)];
    return a / std::sqrt(static_cast<double>(g.n));
}

inline Strategy canonical_strategy(int n) {
    const CliffordBasis basis = clifford_generators(n);
    Strategy s;
    s.game = build_game(n);
    s.state = max_entangled(basis.m_star);
    s.bob_obs = basis.bob_gens;
    s.alice_obs.reserve(static_cast<std::size_t>(s.game.rows()));
    for (std::int64_t x = 0; x < s.game.rows(); ++x) s.alice_obs.push_back(hypercube_observable(s.game, x, basis.alice_gens));
    return s;
}

inline Strategy transposed_strategy(const Strategy& s) {
    Strategy t = s;
    for (auto& a : t.alice_obs) a = a.transpose().eval();
    for (auto& b : t.bob_obs) b = b.transpose().eval();
    return t;
}

/// Block-diagonal direct sum of square matrices.
inline CMatrix direct_sum(const std::vector<CMatrix>& blocks) {
    Eigen::Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    CMatrix out = CMatrix::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

/// Direct sum over blocks k of the canonical strategy tensored with
/// I_{copies[k]}; block k holds probability weights[k] of the state, i.e.
/// sqrt(weights[k]) |phi+_{m_k}> with m_k = copies[k] * m*.
inline Strategy block_sum_strategy(int n, const std::vector<double>& weights, const std::vector<int>& copies) {
    if (weights.empty() || weights.size() != copies.size()) {
        throw InvalidParameter("block_sum_strategy: weights and copies must be non-empty and of equal length");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw InvalidParameter("block_sum_strategy: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("block_sum_strategy: weights must sum to 1");
    for (int c : copies) {
        if (c < 1) throw InvalidParameter("block_sum_strategy: copies must be positive");
    }

    const Strategy canon = canonical_strategy(n);
    const auto m_star = canon.state.dim_a;
    std::vector<CMatrix> state_blocks;
    std::vector<std::vector<CMatrix>> alice_blocks(canon.alice_obs.size());
    std::vector<std::vector<CMatrix>> bob_blocks(canon.bob_obs.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const CMatrix id = CMatrix::Identity(copies[k], copies[k]);
        const Eigen::Index mk = m_star * copies[k];
        state_blocks.push_back(CMatrix::Identity(mk, mk) * std::sqrt(weights[k] / static_cast<double>(mk)));
        for (std::size_t x = 0; x < canon.alice_obs.size(); ++x) alice_blocks[x].push_back(tensor(canon.alice_obs[x], id));
        for (std::size_t y = 0; y < canon.bob_obs.size(); ++y) bob_blocks[y].push_back(tensor(canon.bob_obs[y], id));
    }

    Strategy s;
    s.game = canon.game;
    s.state = vec(direct_sum(state_blocks));
    for (const auto& blocks : alice_blocks) s.alice_obs.push_back(direct_sum(blocks));
    for (const auto& blocks : bob_blocks) s.bob_obs.push_back(direct_sum(blocks));
    return s;
}

/// Appends junk registers |junk_a>, |junk_b> to each side and conjugates
/// everything by the local unitaries u_a (x) v_b.
inline Strategy embed_and_rotate(const Strategy& s, const CVector& junk_a, const CVector& junk_b, const CMatrix& u_a,
                                 const CMatrix& v_b) {
    check_shape(s);
    const Eigen::Index ja = junk_a.size();
    const Eigen::Index jb = junk_b.size();
    const Eigen::Index da = s.state.dim_a * ja;
    const Eigen::Index db = s.state.dim_b * jb;
    if (u_a.rows() != da || u_a.cols() != da || v_b.rows() != db || v_b.cols() != db) {
        throw InvalidParameter("embed_and_rotate: unitary dimension mismatch");
    }
    const CMatrix junk = junk_a * junk_b.transpose();
    const CMatrix m = tensor(unvec(s.state), junk);

    Strategy out;
    out.game = s.game;
    out.state = vec(u_a * m * v_b.transpose());
    const CMatrix ia = CMatrix::Identity(ja, ja);
    const CMatrix ib = CMatrix::Identity(jb, jb);
    for (const auto& a : s.alice_obs) out.alice_obs.push_back(u_a * tensor(a, ia) * u_a.adjoint());
    for (const auto& b : s.bob_obs) out.bob_obs.push_back(v_b * tensor(b, ib) * v_b.adjoint());
    return out;
}

struct ScrambleResult {
    Strategy strategy;
    CMatrix u_alice;  // hidden local unitaries applied after embedding
    CMatrix v_bob;
    CVector junk_a;
    CVector junk_b;
};

/// Seeded adversarial relabelling: Haar-random junk kets and Haar-random
/// local unitaries.
inline ScrambleResult scramble(const Strategy& s, int junk_a, int junk_b, std::uint64_t seed) {
    if (junk_a < 1 || junk_b < 1) throw InvalidParameter("scramble: junk dimensions must be >= 1");
    Rng rng(seed);
    ScrambleResult r;
    r.junk_a = rng.unit_vector(junk_a);
    r.junk_b = rng.unit_vector(junk_b);
    r.u_alice = rng.haar_unitary(s.state.dim_a * junk_a);
    r.v_bob = rng.haar_unitary(s.state.dim_b * junk_b);
    r.strategy = embed_and_rotate(s, r.junk_a, r.junk_b, r.u_alice, r.v_bob);
    return r;
}

}  // namespace bellcert
