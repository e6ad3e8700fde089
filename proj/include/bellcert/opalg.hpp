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
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "bellcert/core.hpp"

namespace bellcert {

enum class Side { A, B };

inline const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

/// Bipartite pure state. Amplitude (i, j) lives at index i * dim_b + j,
/// which makes vec/unvec a row-major reshape and gives
/// (A (x) B) vec(X) = vec(A X B^T).
struct Ket {
    Eigen::Index dim_a = 0;
    Eigen::Index dim_b = 0;
    CVector amplitudes;

    Eigen::Index dim() const { return dim_a * dim_b; }
    double norm() const { return amplitudes.norm(); }
    bool is_normalized(double tol = 1e-12) const { return std::abs(norm() - 1.0) <= tol; }
};

// --- Predicates -------------------------------------------------------------

inline double hermitian_defect(const Op& a) { return (a - a.adjoint()).norm(); }

inline double involution_defect(const Op& a) {
    return (a * a - Op::Identity(a.rows(), a.cols())).norm();
}

inline double unitarity_defect(const CMatrix& u) {
    return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

inline bool is_hermitian(const Op& a, double tol = 1e-10) {
    return a.rows() == a.cols() && a.allFinite() && hermitian_defect(a) <= tol;
}

inline bool is_involution(const Op& a, double tol = 1e-10) {
    return is_hermitian(a, tol) && involution_defect(a) <= tol;
}

inline double anticommutator_norm(const Op& a, const Op& b) { return (a * b + b * a).norm(); }

// --- Tensor products and vectorisation ---------------------------------------

inline constexpr Eigen::Index kMaxDenseDim = 1 << 14;

inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    if (a.rows() * b.rows() > kMaxDenseDim || a.cols() * b.cols() > kMaxDenseDim) {
        throw ResourceLimit("tensor: product dimension exceeds " + std::to_string(kMaxDenseDim));
    }
    return Eigen::kroneckerProduct(a, b).eval();
}

inline CMatrix tensor(std::initializer_list<CMatrix> factors) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (const auto& f : factors) out = tensor(out, f);
    return out;
}

inline Ket vec(const CMatrix& m) {
    Ket k;
    k.dim_a = m.rows();
    k.dim_b = m.cols();
    k.amplitudes.resize(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) k.amplitudes(i * m.cols() + j) = m(i, j);
    }
    return k;
}

inline CMatrix unvec(const Ket& k) {
    if (k.amplitudes.size() != k.dim_a * k.dim_b) {
        throw InvalidParameter("unvec: amplitude count does not match dim_a * dim_b");
    }
    CMatrix m(k.dim_a, k.dim_b);
    for (Eigen::Index i = 0; i < k.dim_a; ++i) {
        for (Eigen::Index j = 0; j < k.dim_b; ++j) m(i, j) = k.amplitudes(i * k.dim_b + j);
    }
    return m;
}

/// Maximally entangled state vec(I_d)/sqrt(d).
inline Ket max_entangled(Eigen::Index d) {
    return vec(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
}

/// (A (x) B)|psi> computed as vec(A M B^T) without forming the Kronecker product.
inline Ket apply_local(const Ket& k, const Op& a, const Op& b) {
    if (a.cols() != k.dim_a || b.cols() != k.dim_b) throw InvalidParameter("apply_local: dimension mismatch");
    return vec(a * unvec(k) * b.transpose());
}

inline Ket apply_a(const Ket& k, const Op& a) {
    if (a.cols() != k.dim_a) throw InvalidParameter("apply_a: dimension mismatch");
    return vec(a * unvec(k));
}

inline Ket apply_b(const Ket& k, const Op& b) {
    if (b.cols() != k.dim_b) throw InvalidParameter("apply_b: dimension mismatch");
    return vec(unvec(k) * b.transpose());
}

/// <psi| A (x) B |psi> = Tr(M^dag A M B^T).
inline Complex expectation(const Ket& k, const Op& a, const Op& b) {
    if (a.rows() != k.dim_a || b.rows() != k.dim_b) throw InvalidParameter("expectation: dimension mismatch");
    const CMatrix m = unvec(k);
    const CMatrix left = m.adjoint() * a * m;  // dim_b x dim_b
    return (left.array() * b.array()).sum();   // Tr(left B^T)
}

/// <psi| I (x) B |psi>.
inline Complex expectation_b(const Ket& k, const Op& b) {
    if (b.rows() != k.dim_b) throw InvalidParameter("expectation_b: dimension mismatch");
    const CMatrix m = unvec(k);
    const CMatrix gram = m.adjoint() * m;
    return (gram.array() * b.array()).sum();
}

/// <psi| A (x) I |psi>.
inline Complex expectation_a(const Ket& k, const Op& a) {
    if (a.rows() != k.dim_a) throw InvalidParameter("expectation_a: dimension mismatch");
    const CMatrix m = unvec(k);
    const CMatrix gram = m * m.adjoint();
    return (gram.array() * a.transpose().array()).sum();
}

// --- Spectral tools -----------------------------------------------------------

struct HermitianEigen {
    RVector values;   // ascending
    CMatrix vectors;  // columns, unitary
};

/// Magnitude above which a component counts as "nonzero" for the phase
/// convention of eig_hermitian.
inline constexpr double kPhaseThreshold = 1e-8;

/// Rotates each column so its first component with magnitude above
/// kPhaseThreshold is real and positive.
inline void fix_column_phases(CMatrix& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            const double mag = std::abs(v(r, c));
            if (mag > kPhaseThreshold) {
                v.col(c) *= std::conj(v(r, c)) / mag;
                v(r, c) = Complex(mag, 0.0);
                break;
            }
        }
    }
}

/// Eigendecomposition A = U diag(values) U^dag, eigenvalues ascending,
/// columns phase-fixed by fix_column_phases.
inline HermitianEigen eig_hermitian(const Op& a, double tol = 1e-10) {
    if (a.rows() != a.cols()) throw InvalidParameter("eig_hermitian: matrix is not square");
    const double scale = std::max(1.0, a.norm());
    if (!a.allFinite() || hermitian_defect(a) > tol * scale) {
        throw PreconditionError("eig_hermitian: input is not Hermitian");
    }
    const Op sym = (a + a.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success) throw InvariantViolation("eig_hermitian: solver failed");
    HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
    fix_column_phases(out.vectors);
    return out;
}

/// U sign(Lambda) U^dag with zero eigenvalues mapped to +1: the Hermitian
/// involution maximising Re Tr(E X).
inline Op hermitian_sign(const Op& e) {
    const Op sym = (e + e.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    RVector s = solver.eigenvalues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) < 0.0 ? -1.0 : 1.0;
    const CMatrix& u = solver.eigenvectors();
    return u * s.cast<Complex>().asDiagonal() * u.adjoint();
}

/// exp(i t H) for Hermitian H.
inline CMatrix exp_i_hermitian(const Op& h, double t) {
    const Op sym = (h + h.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    CVector phases(solver.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(kI * t * solver.eigenvalues()(i));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

// --- Schmidt decomposition ------------------------------------------------------

inline constexpr double kDefaultDegeneracyTol = 1e-8;
inline constexpr double kSchmidtRankTol = 1e-12;

struct SchmidtBlock {
    double lambda = 0.0;         // squared Schmidt coefficient shared by the block
    Eigen::Index multiplicity = 0;
    Eigen::Index begin = 0;      // first index into coefficients
};

/// psi = sum_i coefficients(i) |left_i> (x) |right_i>.
///
/// left_basis and right_basis are full unitaries; their first `rank` columns
/// are the Schmidt vectors. right_basis is the complex conjugate of the right
/// singular vectors of unvec(psi).
struct SchmidtData {
    RVector coefficients;  // descending sqrt(lambda_i) > 0, length rank
    CMatrix left_basis;
    CMatrix right_basis;
    Eigen::Index rank = 0;
    std::vector<SchmidtBlock> blocks;

    RVector lambdas() const { return coefficients.array().square(); }
};

inline SchmidtData schmidt(const Ket& k, double degeneracy_tol = kDefaultDegeneracyTol) {
    if (std::abs(k.norm() - 1.0) > 1e-10) throw PreconditionError("schmidt: state is not normalized");
    const CMatrix m = unvec(k);
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    SchmidtData out;
    out.rank = 0;
    while (out.rank < s.size() && s(out.rank) > kSchmidtRankTol) ++out.rank;
    out.coefficients = s.head(out.rank);
    out.left_basis = svd.matrixU();
    out.right_basis = svd.matrixV().conjugate();
    const RVector lam = out.lambdas();
    Eigen::Index i = 0;
    while (i < out.rank) {
        Eigen::Index j = i + 1;
        while (j < out.rank && std::abs(lam(j) - lam(i)) <= degeneracy_tol) ++j;
        double mean = lam.segment(i, j - i).mean();
        out.blocks.push_back({mean, j - i, i});
        i = j;
    }
    return out;
}

/// Rebuilds the state from its Schmidt data.
inline Ket schmidt_reconstruct(const SchmidtData& sd) {
    const Eigen::Index r = sd.rank;
    const CMatrix m = sd.left_basis.leftCols(r) * sd.coefficients.cast<Complex>().asDiagonal() *
                      sd.right_basis.leftCols(r).transpose();
    return vec(m);
}

// --- Norms and partial traces ------------------------------------------------

/// sqrt(<psi| X^dag X |psi>) with X acting on the chosen side.
inline double state_weighted_norm(const Op& x, const Ket& k, Side side) {
    const Eigen::Index d = side == Side::A ? k.dim_a : k.dim_b;
    if (x.rows() != d || x.cols() != d) throw InvalidParameter("state_weighted_norm: dimension mismatch");
    const CMatrix m = unvec(k);
    return side == Side::A ? (x * m).norm() : (m * x.transpose()).norm();
}

inline CMatrix density(const Ket& k) { return k.amplitudes * k.amplitudes.adjoint(); }

namespace detail {

inline void check_factorisation(const std::vector<Eigen::Index>& dims, const std::vector<int>& keep,
                                Eigen::Index total) {
    Eigen::Index prod = 1;
    for (auto d : dims) {
        if (d < 1) throw InvalidParameter("partial_trace: subsystem dimension < 1");
        prod *= d;
    }
    if (prod != total) throw InvalidParameter("partial_trace: dims do not factor the space");
    std::vector<int> seen(dims.size(), 0);
    for (int q : keep) {
        if (q < 0 || static_cast<std::size_t>(q) >= dims.size() || seen[static_cast<std::size_t>(q)]++) {
            throw InvalidParameter("partial_trace: bad subsystem index");
        }
    }
}

/// Splits a flat index (row-major over dims) into kept/traced flat indices.
struct SplitIndex {
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::Index> traced;
    Eigen::Index kept_dim = 1;
    Eigen::Index traced_dim = 1;
};

inline SplitIndex split_indices(const std::vector<Eigen::Index>& dims, const std::vector<int>& keep) {
    std::vector<int> sorted_keep = keep;
    std::sort(sorted_keep.begin(), sorted_keep.end());
    std::vector<bool> is_kept(dims.size(), false);
    for (int q : sorted_keep) is_kept[static_cast<std::size_t>(q)] = true;
    SplitIndex out;
    for (std::size_t q = 0; q < dims.size(); ++q) (is_kept[q] ? out.kept_dim : out.traced_dim) *= dims[q];
    Eigen::Index total = out.kept_dim * out.traced_dim;
    out.kept.resize(static_cast<std::size_t>(total));
    out.traced.resize(static_cast<std::size_t>(total));
    std::vector<Eigen::Index> digit(dims.size());
    for (Eigen::Index flat = 0; flat < total; ++flat) {
        Eigen::Index rem = flat;
        for (std::size_t q = dims.size(); q-- > 0;) {
            digit[q] = rem % dims[q];
            rem /= dims[q];
        }
        Eigen::Index ki = 0, ti = 0;
        for (std::size_t q = 0; q < dims.size(); ++q) {
            if (is_kept[q]) ki = ki * dims[q] + digit[q];
            else ti = ti * dims[q] + digit[q];
        }
        out.kept[static_cast<std::size_t>(flat)] = ki;
        out.traced[static_cast<std::size_t>(flat)] = ti;
    }
    return out;
}

}  // namespace detail

/// Reduced density matrix of a pure state vector over the subsystems in
/// `keep` (kept in their original order).
inline CMatrix partial_trace(const CVector& psi, const std::vector<Eigen::Index>& dims, const std::vector<int>& keep) {
    detail::check_factorisation(dims, keep, psi.size());
    const auto idx = detail::split_indices(dims, keep);
    CMatrix reshaped = CMatrix::Zero(idx.kept_dim, idx.traced_dim);
    for (Eigen::Index f = 0; f < psi.size(); ++f) {
        reshaped(idx.kept[static_cast<std::size_t>(f)], idx.traced[static_cast<std::size_t>(f)]) = psi(f);
    }
    return reshaped * reshaped.adjoint();
}

inline CMatrix partial_trace(const Ket& k, Side keep) {
    return partial_trace(k.amplitudes, {k.dim_a, k.dim_b}, {keep == Side::A ? 0 : 1});
}

/// Reduced density matrix of a mixed state.
inline CMatrix partial_trace(const CMatrix& rho, const std::vector<Eigen::Index>& dims, const std::vector<int>& keep) {
    if (rho.rows() != rho.cols()) throw InvalidParameter("partial_trace: density matrix is not square");
    detail::check_factorisation(dims, keep, rho.rows());
    const auto idx = detail::split_indices(dims, keep);
    CMatrix out = CMatrix::Zero(idx.kept_dim, idx.kept_dim);
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
        const auto tr = idx.traced[static_cast<std::size_t>(r)];
        const auto kr = idx.kept[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            if (idx.traced[static_cast<std::size_t>(c)] != tr) continue;
            out(kr, idx.kept[static_cast<std::size_t>(c)]) += rho(r, c);
        }
    }
    return out;
}

/// Permutes the tensor factors of a pure state: output factor q is input
/// factor perm[q].
inline CVector permute_factors(const CVector& psi, const std::vector<Eigen::Index>& dims, const std::vector<int>& perm) {
    if (perm.size() != dims.size()) throw InvalidParameter("permute_factors: permutation size mismatch");
    detail::check_factorisation(dims, perm, psi.size());
    std::vector<Eigen::Index> out_dims(dims.size());
    for (std::size_t q = 0; q < dims.size(); ++q) out_dims[q] = dims[static_cast<std::size_t>(perm[q])];
    CVector out(psi.size());
    std::vector<Eigen::Index> digit(dims.size());
    for (Eigen::Index f = 0; f < psi.size(); ++f) {
        Eigen::Index rem = f;
        for (std::size_t q = dims.size(); q-- > 0;) {
            digit[q] = rem % dims[q];
            rem /= dims[q];
        }
        Eigen::Index g = 0;
        for (std::size_t q = 0; q < dims.size(); ++q) g = g * out_dims[q] + digit[static_cast<std::size_t>(perm[q])];
        out(g) = psi(f);
    }
    return out;
}

}  // namespace bellcert
