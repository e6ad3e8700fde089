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

#include "bellcert/bell.hpp"

namespace bellcert {

/// Below this a setting's norm omega_x is treated as zero and the residual
/// M_x is undefined.
inline constexpr double kOmegaCutoff = 1e-10;

/// Factored form of the residuals M_x = (I (x) Bcal_x) / omega_x - A_x (x) I.
struct ResidualOps {
    GameSpec game;
    std::vector<Op> alice;              // A_x
    std::vector<Op> bob_combinations;   // Bcal_x
    RVector omegas;                     // ||Bcal_x||_psi

    std::int64_t size() const { return static_cast<std::int64_t>(alice.size()); }

    /// Dense M_x on the joint space.
    Op joint(std::int64_t x) const {
        const auto& a = alice[static_cast<std::size_t>(x)];
        const auto& b = bob_combinations[static_cast<std::size_t>(x)];
        const CMatrix ia = CMatrix::Identity(a.rows(), a.rows());
        const CMatrix ib = CMatrix::Identity(b.rows(), b.rows());
        return tensor(ia, b) / omegas(x) - tensor(a, ib);
    }

    /// M_x |psi> as a Ket, without forming M_x.
    Ket apply(std::int64_t x, const Ket& k) const {
        const CMatrix m = unvec(k);
        const auto& a = alice[static_cast<std::size_t>(x)];
        const auto& b = bob_combinations[static_cast<std::size_t>(x)];
        return vec(m * b.transpose() / omegas(x) - a * m);
    }
};

inline ResidualOps residual_ops(const Strategy& s) {
    check_shape(s);
    ResidualOps r;
    r.game = s.game;
    r.alice = s.alice_obs;
    r.omegas.resize(s.game.rows());
    for (std::int64_t x = 0; x < s.game.rows(); ++x) {
        r.bob_combinations.push_back(bob_combination(s.game, x, s.bob_obs));
        r.omegas(x) = state_weighted_norm(r.bob_combinations.back(), s.state, Side::B);
        if (r.omegas(x) <= kOmegaCutoff) {
            throw DegenerateStrategy("residual_ops: omega_x vanishes for x = " + std::to_string(x));
        }
    }
    return r;
}

/// sum_x (omega_x / 2) M_x^dag M_x on the joint space.
///
/// Each M_x^dag M_x is expanded with the mixed-product rule into
/// I (x) Bcal^dag Bcal / omega^2 - (A (x) Bcal + A^dag (x) Bcal^dag) / omega + A^dag A (x) I,
/// so only three Kronecker products are formed in total. No involution
/// property is assumed.
inline Op sos_operator(const ResidualOps& r) {
    const Eigen::Index da = r.alice.front().rows();
    const Eigen::Index db = r.bob_combinations.front().rows();
    if (da * db > kMaxDenseDim) throw ResourceLimit("sos_operator: joint dimension too large");
    Op bob_part = Op::Zero(db, db);
    Op alice_part = Op::Zero(da, da);
    Op cross = Op::Zero(da * db, da * db);
    for (std::int64_t x = 0; x < r.size(); ++x) {
        const auto& a = r.alice[static_cast<std::size_t>(x)];
        const auto& b = r.bob_combinations[static_cast<std::size_t>(x)];
        const double w = r.omegas(x);
        bob_part += b.adjoint() * b / (2.0 * w);
        alice_part += a.adjoint() * a * (w / 2.0);
        cross += (tensor(a, b) + tensor(a.adjoint(), b.adjoint())) * 0.5;
    }
    return tensor(CMatrix::Identity(da, da), bob_part) + tensor(alice_part, CMatrix::Identity(db, db)) - cross;
}

struct SosCertificate {
    RVector omegas;
    double identity_defect = 0.0;
    RVector kernel_residuals;
    double claimed_value = 0.0;   // sum_x omega_x
    double bell_value = 0.0;      // <psi|G|psi>
    /// |<psi| sum_x (omega_x/2) M_x^dag M_x |psi> - (sum_x omega_x - <G>)|.
    double expectation_defect = 0.0;
    /// Worst hermiticity or involution defect over all observables.
    double premise_defect = 0.0;
};

/// Checks sum_x (omega_x/2) M_x^dag M_x = (sum_x omega_x) I - G_n and reports
/// ||M_x psi|| for every x.
///
/// Expanding M_x^dag M_x with A_x^2 = I leaves I (x) Bcal_x^2 / omega_x, so the
/// operator identity holds exactly when every Bcal_x^2 is the scalar
/// omega_x^2 I (anticommuting Bob observables, or traceless qubit
/// observables). On the state itself the identity holds for any involutive
/// strategy, which `expectation_defect` records. `premise_defect` measures
/// how far the observables are from Hermitian involutions; a certificate is
/// only meaningful when it is small.
inline SosCertificate verify_sos_identity(const Strategy& s) {
    const ResidualOps r = residual_ops(s);
    SosCertificate c;
    c.omegas = r.omegas;
    c.claimed_value = r.omegas.sum();
    c.bell_value = bell_value(s);
    const BellOperator g = bell_operator(s);
    const Op lhs = sos_operator(r);
    const Op rhs = c.claimed_value * Op::Identity(g.matrix.rows(), g.matrix.cols()) - g.matrix;
    c.identity_defect = (lhs - rhs).norm();
    const double on_state = s.state.amplitudes.dot(lhs * s.state.amplitudes).real();
    c.expectation_defect = std::abs(on_state - (c.claimed_value - c.bell_value));
    for (const auto* side : {&s.alice_obs, &s.bob_obs}) {
        for (const auto& o : *side) {
            c.premise_defect = std::max({c.premise_defect, hermitian_defect(o), involution_defect(o)});
        }
    }
    c.kernel_residuals.resize(r.size());
    for (std::int64_t x = 0; x < r.size(); ++x) c.kernel_residuals(x) = r.apply(x, s.state).norm();
    return c;
}

/// Alice's effective observables (sqrt n / 2^{n-1}) sum_x signs(x, y) A_x.
inline std::vector<Op> alice_effective(const Strategy& s) {
    const GameSpec& g = s.game;
    const double scale = std::sqrt(static_cast<double>(g.n)) / static_cast<double>(g.rows());
    std::vector<Op> out(static_cast<std::size_t>(g.n), Op::Zero(s.state.dim_a, s.state.dim_a));
    for (std::int64_t x = 0; x < g.rows(); ++x) {
        for (int y = 0; y < g.n; ++y) {
            out[static_cast<std::size_t>(y)] += static_cast<double>(g.sign(x, y)) * s.alice_obs[static_cast<std::size_t>(x)];
        }
    }
    for (auto& o : out) o *= scale;
    return out;
}

/// Real part of <psi|{O_i, O_j}|psi> for Hermitian O on one side.
inline RMatrix anticommutator_expectations(const std::vector<Op>& obs, const Ket& k, Side side) {
    const CMatrix m = unvec(k);
    std::vector<CMatrix> images;
    images.reserve(obs.size());
    for (const auto& o : obs) images.push_back(side == Side::A ? CMatrix(o * m) : CMatrix(m * o.transpose()));
    const auto count = static_cast<Eigen::Index>(obs.size());
    RMatrix out(count, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = i; j < count; ++j) {
            const Complex ip = (images[static_cast<std::size_t>(i)].conjugate().array() *
                                images[static_cast<std::size_t>(j)].array())
                                   .sum();
            out(i, j) = out(j, i) = 2.0 * ip.real();
        }
    }
    return out;
}

struct OptimalityDiagnostics {
    RMatrix bob_anticomm;              // n x n, zero diagonal
    double max_bob_anticomm = 0.0;
    double alice_anticomm_defect = 0.0;
    RMatrix alice_effective_anticomm;  // n x n, zero diagonal
    double max_alice_effective_anticomm = 0.0;
    RVector transpose_defects;         // per y
    double transpose_defect = 0.0;
    RVector alice_offblock;            // per x
    RVector bob_offblock;              // per y
    double max_offblock = 0.0;
    std::vector<SchmidtBlock> blocks;
    Eigen::Index schmidt_rank = 0;
};

namespace detail {

// Frobenius mass of O outside the diagonal blocks [0, b1), [b1, b2), ...,
// [rank, d) of a basis-rotated operator.
inline double offblock_mass(const CMatrix& o, const std::vector<Eigen::Index>& cuts) {
    double inside = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const Eigen::Index len = cuts[k + 1] - cuts[k];
        if (len > 0) inside += o.block(cuts[k], cuts[k], len, len).squaredNorm();
    }
    return std::sqrt(std::max(0.0, o.squaredNorm() - inside));
}

}  // namespace detail

inline OptimalityDiagnostics optimality_diagnostics(const Strategy& s, double degeneracy_tol = kDefaultDegeneracyTol) {
    check_shape(s);
    const GameSpec& g = s.game;
    const int n = g.n;
    OptimalityDiagnostics d;

    d.bob_anticomm = anticommutator_expectations(s.bob_obs, s.state, Side::B);
    d.bob_anticomm.diagonal().setZero();
    d.max_bob_anticomm = d.bob_anticomm.cwiseAbs().maxCoeff();

    const RMatrix alice = anticommutator_expectations(s.alice_obs, s.state, Side::A);
    for (std::int64_t x = 0; x < g.rows(); ++x) {
        for (std::int64_t xp = x; xp < g.rows(); ++xp) {
            double expected = 0.0;
            for (int y = 0; y < n; ++y) expected += g.sign(x, y) * g.sign(xp, y);
            expected *= 2.0 / n;
            d.alice_anticomm_defect = std::max(d.alice_anticomm_defect, std::abs(alice(x, xp) - expected));
        }
    }

    const std::vector<Op> eff = alice_effective(s);
    d.alice_effective_anticomm = anticommutator_expectations(eff, s.state, Side::A);
    d.alice_effective_anticomm.diagonal().setZero();
    d.max_alice_effective_anticomm = d.alice_effective_anticomm.cwiseAbs().maxCoeff();

    // Schmidt frame: M = U D R^T with D rectangular diagonal.
    const SchmidtData sd = schmidt(s.state, degeneracy_tol);
    d.blocks = sd.blocks;
    d.schmidt_rank = sd.rank;
    const CMatrix& u = sd.left_basis;
    const CMatrix& rb = sd.right_basis;
    CMatrix dmat = CMatrix::Zero(s.state.dim_a, s.state.dim_b);
    for (Eigen::Index i = 0; i < sd.rank; ++i) dmat(i, i) = sd.coefficients(i);

    d.transpose_defects.resize(n);
    for (int y = 0; y < n; ++y) {
        const CMatrix a_frame = u.adjoint() * eff[static_cast<std::size_t>(y)] * u;
        const CMatrix b_frame = rb.adjoint() * s.bob_obs[static_cast<std::size_t>(y)] * rb;
        d.transpose_defects(y) = (a_frame * dmat - dmat * b_frame.transpose()).norm();
    }
    d.transpose_defect = d.transpose_defects.maxCoeff();

    std::vector<Eigen::Index> cuts_a{0}, cuts_b{0};
    for (const auto& b : sd.blocks) {
        cuts_a.push_back(b.begin + b.multiplicity);
        cuts_b.push_back(b.begin + b.multiplicity);
    }
    cuts_a.push_back(s.state.dim_a);
    cuts_b.push_back(s.state.dim_b);
    d.alice_offblock.resize(g.rows());
    for (std::int64_t x = 0; x < g.rows(); ++x) {
        d.alice_offblock(x) = detail::offblock_mass(u.adjoint() * s.alice_obs[static_cast<std::size_t>(x)] * u, cuts_a);
    }
    d.bob_offblock.resize(n);
    for (int y = 0; y < n; ++y) {
        d.bob_offblock(y) = detail::offblock_mass(rb.adjoint() * s.bob_obs[static_cast<std::size_t>(y)] * rb, cuts_b);
    }
    d.max_offblock = std::max(d.alice_offblock.maxCoeff(), d.bob_offblock.maxCoeff());
    return d;
}

}  // namespace bellcert
