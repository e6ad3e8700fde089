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
#include <string>
#include <vector>

#include "bellcert/sos.hpp"

namespace bellcert {

inline constexpr double kDefaultExtractionTol = 1e-8;
inline constexpr double kDefaultFidelityThreshold = 1.0 - 1e-6;

/// Result of rotating n observables into the canonical Clifford form.
struct Canonicalization {
    CMatrix unitary;            // W with W O_y W^dag ~ target_y
    std::vector<Op> targets;    // Gamma_y (x) I (side B) or Gamma_y^T (x) I (side A)
    RVector defects;            // ||W O_y W^dag - target_y||_F
    bool conjugate = false;     // odd n only: last generator landed on -Gamma_n
    Eigen::Index junk_dim = 1;
};

namespace detail {

// Nearest unitary in Frobenius norm (polar factor).
inline CMatrix polar_unitary(const CMatrix& x) {
    Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

struct Level {
    CMatrix w;
    bool conjugate = false;
};

inline Level canonicalize_rec(const std::vector<Op>& obs, Eigen::Index d, Side side) {
    if (obs.empty()) return {CMatrix::Identity(d, d), false};
    if (obs.size() == 1) {
        // One generator left (odd n): it is +-I in an irreducible block; the
        // sign of its trace decides between the two inequivalent families.
        return {CMatrix::Identity(d, d), obs.front().trace().real() < 0.0};
    }

    const Op o1 = (obs[0] + obs[0].adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(o1);
    CMatrix vecs = solver.eigenvectors();
    fix_column_phases(vecs);
    const RVector& vals = solver.eigenvalues();
    std::vector<Eigen::Index> plus, minus;
    for (Eigen::Index i = 0; i < d; ++i) (vals(i) > 0.0 ? plus : minus).push_back(i);
    if (plus.size() != minus.size()) {
        throw NotExtractable("canonicalize_observables: +1 and -1 eigenspaces of the first generator differ in "
                             "dimension (" + std::to_string(plus.size()) + " vs " + std::to_string(minus.size()) + ")");
    }
    const Eigen::Index h = d / 2;
    CMatrix v1(d, d);
    for (Eigen::Index i = 0; i < h; ++i) {
        v1.col(i) = vecs.col(plus[static_cast<std::size_t>(i)]);
        v1.col(h + i) = vecs.col(minus[static_cast<std::size_t>(i)]);
    }

    const CMatrix o2 = v1.adjoint() * obs[1] * v1;
    const CMatrix x2 = polar_unitary(o2.topRightCorner(h, h));
    CMatrix v2 = CMatrix::Zero(d, d);
    v2.topLeftCorner(h, h).setIdentity();
    const Complex phase = side == Side::B ? -kI : kI;
    v2.bottomRightCorner(h, h) = phase * x2;

    // Remaining generators become X (x) O_s with O_s the top-right block
    // after both rotations.
    const CMatrix step = v2 * v1.adjoint();
    std::vector<Op> inner;
    for (std::size_t s = 2; s < obs.size(); ++s) {
        const CMatrix rotated = step * obs[s] * step.adjoint();
        const CMatrix top_right = rotated.topRightCorner(h, h);
        inner.push_back((top_right + top_right.adjoint()) * 0.5);
    }
    const Level sub = canonicalize_rec(inner, h, side);
    return {tensor(pauli::I2(), sub.w) * step, sub.conjugate};
}

}  // namespace detail

/// Rotates n Hermitian involutions with pairwise vanishing anticommutators
/// onto Gamma_y (x) I_junk (side B) or Gamma_y^T (x) I_junk (side A).
inline Canonicalization canonicalize_observables(const std::vector<Op>& obs, Side side,
                                                 double tol = kDefaultExtractionTol) {
    const int n = static_cast<int>(obs.size());
    if (n < 2) throw InvalidParameter("canonicalize_observables: need at least two observables");
    const Eigen::Index d = obs.front().rows();
    const Eigen::Index m_star = clifford_dim(n);
    for (const auto& o : obs) {
        if (o.rows() != d || o.cols() != d) throw InvalidParameter("canonicalize_observables: dimension mismatch");
    }
    if (d % m_star != 0) {
        throw InvalidParameter("canonicalize_observables: dimension " + std::to_string(d) + " is not a multiple of " +
                               std::to_string(m_star));
    }
    for (int y = 0; y < n; ++y) {
        const auto& o = obs[static_cast<std::size_t>(y)];
        if (hermitian_defect(o) > tol || involution_defect(o) > tol) {
            throw PreconditionError("canonicalize_observables: observable " + std::to_string(y) +
                                    " is not a Hermitian involution");
        }
        for (int yp = y + 1; yp < n; ++yp) {
            if (anticommutator_norm(o, obs[static_cast<std::size_t>(yp)]) > tol) {
                throw PreconditionError("canonicalize_observables: observables " + std::to_string(y) + " and " +
                                        std::to_string(yp) + " do not anticommute");
            }
        }
    }

    const detail::Level top = detail::canonicalize_rec(obs, d, side);
    Canonicalization c;
    c.unitary = top.w;
    c.conjugate = top.conjugate;
    c.junk_dim = d / m_star;
    const CliffordBasis basis = clifford_generators(n);
    const auto& gens = side == Side::B ? basis.bob_gens : basis.alice_gens;
    const CMatrix junk_id = CMatrix::Identity(c.junk_dim, c.junk_dim);
    c.defects.resize(n);
    for (int y = 0; y < n; ++y) {
        Op target = tensor(gens[static_cast<std::size_t>(y)], junk_id);
        if (c.conjugate && y == n - 1) target = -target;
        c.defects(y) = (c.unitary * obs[static_cast<std::size_t>(y)] * c.unitary.adjoint() - target).norm();
        c.targets.push_back(std::move(target));
    }
    return c;
}

struct ExtractionReport {
    int n = 0;
    Eigen::Index m_star = 0;
    int pair_count = 0;
    CMatrix u_alice;
    CMatrix v_bob;
    double u_alice_unitarity_defect = 0.0;
    double v_bob_unitarity_defect = 0.0;
    RVector alice_defects;  // per y, against Gamma_y^T (x) I
    RVector bob_defects;    // per y, against Gamma_y (x) I
    double max_generator_defect = 0.0;
    bool alice_conjugate = false;
    bool bob_conjugate = false;
    double precondition_defect = 0.0;  // Alice-Bob transpose relation on the state
    double state_fidelity = 0.0;
    RVector pair_fidelities;
    std::vector<int> permutation;      // tensor-factor order used for the pair fidelities
    std::pair<Eigen::Index, Eigen::Index> junk_dims{1, 1};
    double junk_purity = 0.0;
    RVector stabilizer_residuals;
    double odd_parity_mass = 0.0;
    Ket rotated_state;
    bool success = false;
    std::string failure_reason;
};

namespace detail {

inline double fidelity_with_max_entangled(const CMatrix& rho, Eigen::Index m) {
    const CVector phi = max_entangled(m).amplitudes;
    return std::clamp((phi.adjoint() * rho * phi)(0, 0).real(), 0.0, 1.0 + 1e-12);
}

}  // namespace detail

/// Recovers local unitaries that map Bob's observables and Alice's
/// effective observables onto the Clifford generators, applies them to the
/// state, and measures how close the reference registers are to
/// |phi+_{m*}> with the junk split off.
inline ExtractionReport extract_strategy(const Strategy& s, double tol = kDefaultExtractionTol,
                                         double fidelity_threshold = kDefaultFidelityThreshold) {
    check_shape(s);
    ExtractionReport r;
    r.n = s.game.n;
    r.m_star = clifford_dim(r.n);
    r.pair_count = r.n / 2;
    r.precondition_defect = optimality_diagnostics(s).transpose_defect;

    const std::vector<Op> eff = alice_effective(s);
    const Canonicalization ca = canonicalize_observables(eff, Side::A, tol);
    const Canonicalization cb = canonicalize_observables(s.bob_obs, Side::B, tol);
    r.u_alice = ca.unitary;
    r.v_bob = cb.unitary;
    r.u_alice_unitarity_defect = unitarity_defect(ca.unitary);
    r.v_bob_unitarity_defect = unitarity_defect(cb.unitary);
    r.alice_defects = ca.defects;
    r.bob_defects = cb.defects;
    r.max_generator_defect = std::max(ca.defects.maxCoeff(), cb.defects.maxCoeff());
    r.alice_conjugate = ca.conjugate;
    r.bob_conjugate = cb.conjugate;
    r.junk_dims = {ca.junk_dim, cb.junk_dim};

    r.rotated_state = apply_local(s.state, ca.unitary, cb.unitary);
    const CVector& psi = r.rotated_state.amplitudes;
    const Eigen::Index m = r.m_star;

    // Reference registers (A_ref, B_ref) against junk (J_A, J_B).
    const std::vector<Eigen::Index> dims4{m, ca.junk_dim, m, cb.junk_dim};
    const CMatrix rho_ref = partial_trace(psi, dims4, {0, 2});
    r.state_fidelity = detail::fidelity_with_max_entangled(rho_ref, m);
    const CMatrix rho_junk = partial_trace(psi, dims4, {1, 3});
    r.junk_purity = (rho_junk * rho_junk).trace().real();

    // Qubit-level view: Alice qubits a_1..a_p, junk, Bob qubits b_1..b_p,
    // junk. Reorder to (a_1 b_1)(a_2 b_2)...(J_A J_B).
    const int p = r.pair_count;
    std::vector<Eigen::Index> qdims;
    for (int i = 0; i < p; ++i) qdims.push_back(2);
    qdims.push_back(ca.junk_dim);
    for (int i = 0; i < p; ++i) qdims.push_back(2);
    qdims.push_back(cb.junk_dim);
    r.permutation.clear();
    for (int i = 0; i < p; ++i) {
        r.permutation.push_back(i);
        r.permutation.push_back(p + 1 + i);
    }
    r.permutation.push_back(p);
    r.permutation.push_back(2 * p + 1);
    const CVector interleaved = permute_factors(psi, qdims, r.permutation);
    std::vector<Eigen::Index> idims;
    for (int i = 0; i < p; ++i) {
        idims.push_back(2);
        idims.push_back(2);
    }
    idims.push_back(ca.junk_dim);
    idims.push_back(cb.junk_dim);
    r.pair_fidelities.resize(p);
    for (int i = 0; i < p; ++i) {
        const CMatrix rho_pair = partial_trace(interleaved, idims, {2 * i, 2 * i + 1});
        r.pair_fidelities(i) = detail::fidelity_with_max_entangled(rho_pair, 2);
    }

    // Computational-basis parity: every reference pair should read i_k == j_k.
    const Eigen::Index ja = ca.junk_dim, jb = cb.junk_dim;
    const CMatrix mat = unvec(r.rotated_state);
    double odd = 0.0;
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (i / ja != j / jb) odd += std::norm(mat(i, j));
        }
    }
    r.odd_parity_mass = odd;

    r.stabilizer_residuals.resize(r.n);
    for (int y = 0; y < r.n; ++y) {
        const Ket image = apply_local(r.rotated_state, ca.targets[static_cast<std::size_t>(y)],
                                      cb.targets[static_cast<std::size_t>(y)]);
        r.stabilizer_residuals(y) = (image.amplitudes - psi).norm();
    }

    r.success = true;
    auto fail = [&r](const std::string& why) {
        if (r.success) r.failure_reason = why;
        r.success = false;
    };
    if (r.alice_conjugate != r.bob_conjugate) fail("Alice and Bob landed in different Clifford families");
    if (r.max_generator_defect > tol) fail("generator defect above tolerance");
    if (r.precondition_defect > tol) fail("Alice-Bob transpose relation violated on the state");
    if (r.state_fidelity < fidelity_threshold) fail("reference fidelity below threshold");
    return r;
}

struct BlockwiseReport {
    std::vector<ExtractionReport> blocks;
    std::vector<double> weights;          // block probabilities m_k * lambda_k
    std::vector<Eigen::Index> multiplicities;
    double max_leakage = 0.0;
    double recombination_defect = 0.0;    // || psi - sum_k sqrt(w_k) (U_k (x) R_k) psi_k ||
    double isometry_defect = 0.0;         // composed direct-sum map, Alice and Bob, worst case
    double min_fidelity = 0.0;
    bool success = false;
};

/// Splits the local spaces along the Schmidt blocks of the state, extracts
/// each block separately and checks that the pieces recombine.
inline BlockwiseReport extract_blockwise(const Strategy& s, double degeneracy_tol = kDefaultDegeneracyTol,
                                         double tol = kDefaultExtractionTol,
                                         double fidelity_threshold = kDefaultFidelityThreshold) {
    check_shape(s);
    const SchmidtData sd = schmidt(s.state, degeneracy_tol);
    BlockwiseReport out;
    const CMatrix m = unvec(s.state);
    CMatrix rebuilt = CMatrix::Zero(m.rows(), m.cols());
    Eigen::Index total_a = 0, total_b = 0;
    std::vector<CMatrix> phi_a, phi_b;

    auto leakage = [](const CMatrix& basis, const Op& o) {
        const CMatrix image = o * basis;
        return (image - basis * (basis.adjoint() * image)).norm();
    };

    for (const auto& blk : sd.blocks) {
        const CMatrix uk = sd.left_basis.middleCols(blk.begin, blk.multiplicity);
        const CMatrix rk = sd.right_basis.middleCols(blk.begin, blk.multiplicity);
        Strategy part;
        part.game = s.game;
        for (const auto& a : s.alice_obs) {
            out.max_leakage = std::max(out.max_leakage, leakage(uk, a));
            part.alice_obs.push_back(uk.adjoint() * a * uk);
        }
        for (const auto& b : s.bob_obs) {
            out.max_leakage = std::max(out.max_leakage, leakage(rk, b));
            part.bob_obs.push_back(rk.adjoint() * b * rk);
        }
        if (out.max_leakage > degeneracy_tol) {
            throw BlockStructureViolation("extract_blockwise: observable leaks across Schmidt blocks (" +
                                          std::to_string(out.max_leakage) + ")");
        }
        const RVector coeffs = sd.coefficients.segment(blk.begin, blk.multiplicity);
        const double weight = coeffs.squaredNorm();
        const CMatrix mk = coeffs.cast<Complex>().asDiagonal();
        part.state = vec(mk / std::sqrt(weight));
        rebuilt += uk * mk * rk.transpose();

        ExtractionReport rep = extract_strategy(part, tol, fidelity_threshold);
        phi_a.push_back(rep.u_alice * uk.adjoint());
        phi_b.push_back(rep.v_bob * rk.adjoint());
        total_a += blk.multiplicity;
        total_b += blk.multiplicity;
        out.weights.push_back(weight);
        out.multiplicities.push_back(blk.multiplicity);
        out.blocks.push_back(std::move(rep));
    }
    out.recombination_defect = (m - rebuilt).norm();

    // Stack the per-block maps into one map from H onto the direct sum of the
    // block spaces; it must be a co-isometry onto that sum.
    auto stacked_defect = [](const std::vector<CMatrix>& parts, Eigen::Index rows, Eigen::Index cols) {
        CMatrix phi(rows, cols);
        Eigen::Index r = 0;
        for (const auto& p : parts) {
            phi.middleRows(r, p.rows()) = p;
            r += p.rows();
        }
        return (phi * phi.adjoint() - CMatrix::Identity(rows, rows)).norm();
    };
    out.isometry_defect = std::max(stacked_defect(phi_a, total_a, s.state.dim_a),
                                   stacked_defect(phi_b, total_b, s.state.dim_b));

    out.min_fidelity = 1.0;
    out.success = true;
    for (const auto& rep : out.blocks) {
        out.min_fidelity = std::min(out.min_fidelity, rep.state_fidelity);
        out.success = out.success && rep.success;
    }
    out.success = out.success && out.recombination_defect <= 1e-9 && out.isometry_defect <= tol;
    return out;
}

}  // namespace bellcert
