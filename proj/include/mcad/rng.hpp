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

#ifndef MCAD_RNG_HPP
#define MCAD_RNG_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mcad {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stream splitting: the seed of stream (root, k1, k2, ...) is obtained by
// folding each key into the state with splitmix64,
//   s0 = splitmix64(root), s_{j+1} = splitmix64(s_j ^ splitmix64(k_j + 1)).
// Distinct key paths give statistically independent mt19937_64 streams.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(root, keys));
}

// CN(0, 1): real and imaginary parts are independent N(0, 1/2).
std::complex<double> complex_normal(Rng& rng);

double standard_normal(Rng& rng);

} // namespace mcad

#endif
