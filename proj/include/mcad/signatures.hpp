// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MCAD_SIGNATURES_HPP
#define MCAD_SIGNATURES_HPP

#include "mcad/rng.hpp"

#include <Eigen/Dense>

namespace mcad {

/// Signature sequences, one per column, each of Euclidean norm sqrt(L).
struct SignatureSet {
    Eigen::MatrixXcd S;
    Eigen::VectorXd column_norms;

    int length() const { return static_cast<int>(S.rows()); }
    int count() const { return static_cast<int>(S.cols()); }
};

SignatureSet sample_sphere_sequences(int length, int count, Rng& rng);

/// Wraps an explicit sequence matrix (columns are not renormalized).
SignatureSet make_signature_set(Eigen::MatrixXcd S);

/// Self-Khatri-Rao lift of a signature set.
///   S_tilde.col(i) = conj(s_i) (x) s_i = vec(s_i s_i^H)        (L^2 complex)
///   W.col(i)       = real embedding of s_i s_i^H                (L^2 real)
/// The embedding lists the diagonal, then sqrt(2) Re and sqrt(2) Im of the
/// strict upper triangle in row-major order, so that
/// dot(W_i, W_k) = tr(s_i s_i^H s_k s_k^H) = |s_i^H s_k|^2.
struct LiftedSignatures {
    Eigen::MatrixXcd S_tilde;
    Eigen::MatrixXd W;
};

LiftedSignatures build_lift(const SignatureSet& sigs);

/// Real embedding of a Hermitian L x L matrix into R^{L^2} (same layout as W).
Eigen::VectorXd hermitian_embedding(const Eigen::MatrixXcd& H);

} // namespace mcad

#endif
