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
#include <random>

#include <Eigen/Dense>

#include "bellcert/core.hpp"

namespace bellcert {

/// Seeded source of the random matrices used for adversaries and noise.
/// Draw order is fixed, so equal seeds give equal sequences.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    Complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    CMatrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        CMatrix z(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) z(r, c) = complex_normal();
        }
        return z;
    }

    /// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
    /// diag(R) pushed into Q.
    CMatrix haar_unitary(Eigen::Index d) {
        const CMatrix z = ginibre(d, d);
        Eigen::HouseholderQR<CMatrix> qr(z);
        CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
        const CMatrix& r = qr.matrixQR();
        for (Eigen::Index i = 0; i < d; ++i) {
            const double mag = std::abs(r(i, i));
            const Complex phase = mag > 0.0 ? r(i, i) / mag : Complex(1.0, 0.0);
            q.col(i) *= phase;
        }
        return q;
    }

    /// Uniformly random unit vector.
    CVector unit_vector(Eigen::Index d) {
        CVector v = ginibre(d, 1).col(0);
        return v / v.norm();
    }

    /// GUE-type Hermitian matrix scaled to unit Frobenius norm.
    CMatrix unit_hermitian(Eigen::Index d) {
        const CMatrix z = ginibre(d, d);
        CMatrix h = (z + z.adjoint()) * 0.5;
        return h / h.norm();
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bellcert
