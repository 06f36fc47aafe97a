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

#ifndef MCAD_ERRORS_HPP
#define MCAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mcad {

// Invalid user-supplied parameter (dimensions, ranges, config values).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class SingularCovarianceError : public NumericalError {
public:
    explicit SingularCovarianceError(const std::string& what) : NumericalError(what) {}
};

} // namespace mcad

#endif
