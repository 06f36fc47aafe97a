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

#include "mcad/rng.hpp"

#include <cmath>

namespace mcad {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = splitmix64(root);
    for (std::uint64_t k : keys) {
        state = splitmix64(state ^ splitmix64(k + 1));
    }
    return state;
}

std::complex<double> complex_normal(Rng& rng) {
    std::normal_distribution<double> half(0.0, std::sqrt(0.5));
    const double re = half(rng);
    const double im = half(rng);
    return {re, im};
}

double standard_normal(Rng& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return unit(rng);
}

} // namespace mcad
