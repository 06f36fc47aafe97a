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

#include "mcad/signatures.hpp"

#include "mcad/errors.hpp"

#include <cmath>

namespace mcad {

SignatureSet sample_sphere_sequences(int length, int count, Rng& rng) {
    if (length < 1 || count < 1) {
        throw ParameterError("sample_sphere_sequences: length and count must be >= 1");
    }
    Eigen::MatrixXcd S(length, count);
    const double radius = std::sqrt(static_cast<double>(length));
    for (int i = 0; i < count; ++i) {
        for (int l = 0; l < length; ++l) {
            S(l, i) = complex_normal(rng);
        }
        const double norm = S.col(i).norm();
        S.col(i) *= radius / norm;
    }
    return make_signature_set(std::move(S));
}

SignatureSet make_signature_set(Eigen::MatrixXcd S) {
    SignatureSet out;
    out.column_norms = S.colwise().norm().transpose();
    out.S = std::move(S);
    return out;
}

Eigen::VectorXd hermitian_embedding(const Eigen::MatrixXcd& H) {
    const Eigen::Index L = H.rows();
    Eigen::VectorXd v(L * L);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < L; ++i) {
        v(k++) = H(i, i).real();
    }
    const double root2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < L; ++i) {
        for (Eigen::Index j = i + 1; j < L; ++j) {
            v(k++) = root2 * H(i, j).real();
            v(k++) = root2 * H(i, j).imag();
        }
    }
    return v;
}

LiftedSignatures build_lift(const SignatureSet& sigs) {
    const int L = sigs.length();
    const int n = sigs.count();
    LiftedSignatures lift;
    lift.S_tilde.resize(L * L, n);
    lift.W.resize(L * L, n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd s = sigs.S.col(i);
        for (int j = 0; j < L; ++j) {
            lift.S_tilde.col(i).segment(j * L, L) = std::conj(s(j)) * s;
        }
        lift.W.col(i) = hermitian_embedding(s * s.adjoint());
    }
    return lift;
}

} // namespace mcad
