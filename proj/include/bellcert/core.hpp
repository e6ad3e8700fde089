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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bellcert {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Dense observable on a single party's Hilbert space.
using Op = CMatrix;

inline constexpr Complex kI{0.0, 1.0};

/// Bad argument supplied by the caller (out-of-range n, wrong dims, ...).
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input violates a mathematical precondition of the algorithm.
struct PreconditionError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A requested computation exceeds the configured size limits.
struct ResourceLimit : std::length_error {
    using std::length_error::length_error;
};

/// Exact integer arithmetic overflowed.
struct ArithmeticError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

/// An internal invariant that should always hold was violated.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Strategy cannot be mapped to the canonical Clifford form.
struct NotExtractable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Observables mix distinct Schmidt blocks.
struct BlockStructureViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Some residual normalisation vanished (omega_x below cutoff).
struct DegenerateStrategy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 2^k for small non-negative k.
constexpr std::uint64_t pow2(int k) { return std::uint64_t{1} << k; }

}  // namespace bellcert
