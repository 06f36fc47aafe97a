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

#include "mcad/geometry.hpp"

#include "mcad/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

namespace mcad {

namespace {

constexpr std::array<AxialCoord, 6> kDirections{{{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};

Point axial_to_point(AxialCoord c, double radius_m) {
    const double sqrt3 = std::sqrt(3.0);
    return {radius_m * sqrt3 * (c.q + 0.5 * c.r), radius_m * 1.5 * c.r};
}

constexpr int kMaxRejections = 1'000'000;

} // namespace

double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

int hex_distance(AxialCoord a, AxialCoord b) {
    const int dq = a.q - b.q;
    const int dr = a.r - b.r;
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

CellLayout build_hex_layout(int num_cells, double radius_m) {
    if (num_cells < 1) {
        throw ParameterError("build_hex_layout: number of cells must be >= 1, got " + std::to_string(num_cells));
    }
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
        throw ParameterError("build_hex_layout: radius must be positive and finite");
    }

    CellLayout layout;
    layout.num_cells = num_cells;
    layout.radius_m = radius_m;
    layout.axial.push_back({0, 0});

    for (int ring = 1; static_cast<int>(layout.axial.size()) < num_cells; ++ring) {
        AxialCoord c{kDirections[4].q * ring, kDirections[4].r * ring};
        for (int side = 0; side < 6; ++side) {
            for (int step = 0; step < ring; ++step) {
                layout.axial.push_back(c);
                c.q += kDirections[side].q;
                c.r += kDirections[side].r;
            }
        }
    }
    layout.axial.resize(num_cells);

    layout.bs_positions.reserve(num_cells);
    for (const auto& c : layout.axial) {
        layout.bs_positions.push_back(axial_to_point(c, radius_m));
    }
    return layout;
}

bool inside_hexagon(Point p, Point center, double radius_m) {
    const double dx = std::abs(p.x - center.x);
    const double dy = std::abs(p.y - center.y);
    const double apothem = 0.5 * std::sqrt(3.0) * radius_m;
    return dx <= apothem && dy <= radius_m - dx / std::sqrt(3.0);
}

DevicePlacement place_devices(const CellLayout& layout, int devices_per_cell, Rng& rng, double d_min_m) {
    if (devices_per_cell < 1) {
        throw ParameterError("place_devices: devices per cell must be >= 1");
    }
    if (!(d_min_m >= 0.0) || d_min_m >= 0.5 * std::sqrt(3.0) * layout.radius_m) {
        throw ParameterError("place_devices: d_min must lie in [0, apothem)");
    }

    const double half_width = 0.5 * std::sqrt(3.0) * layout.radius_m;
    std::uniform_real_distribution<double> ux(-half_width, half_width);
    std::uniform_real_distribution<double> uy(-layout.radius_m, layout.radius_m);

    DevicePlacement placement;
    placement.devices_per_cell = devices_per_cell;
    placement.positions.reserve(static_cast<std::size_t>(layout.num_cells) * devices_per_cell);
    placement.home_cell.reserve(placement.positions.capacity());

    const Point origin{};
    for (int cell = 0; cell < layout.num_cells; ++cell) {
        const Point bs = layout.bs_positions[cell];
        for (int n = 0; n < devices_per_cell; ++n) {
            int attempts = 0;
            while (true) {
                if (++attempts > kMaxRejections) {
                    throw NumericalError("place_devices: rejection sampling did not terminate");
                }
                const Point offset{ux(rng), uy(rng)};
                if (!inside_hexagon(offset, origin, layout.radius_m)) {
                    continue;
                }
                if (std::hypot(offset.x, offset.y) < d_min_m) {
                    continue;
                }
                placement.positions.push_back({bs.x + offset.x, bs.y + offset.y});
                placement.home_cell.push_back(cell);
                break;
            }
        }
    }
    return placement;
}

double PathLossModel::path_loss_db(double distance_m) const {
    if (!std::isfinite(distance_m)) {
        throw ParameterError("path loss: non-finite distance");
    }
    const double d_km = std::max(distance_m, d_min_m) / 1000.0;
    return pl_db_at_1km + slope_db_per_decade * std::log10(d_km);
}

double PathLossModel::gain(double distance_m) const {
    return std::pow(10.0, -path_loss_db(distance_m) / 10.0);
}

double PathLossModel::noise_variance() const {
    return std::pow(10.0, (noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) - tx_power_dbm) / 10.0);
}

void PathLossModel::validate() const {
    const bool finite = std::isfinite(pl_db_at_1km) && std::isfinite(slope_db_per_decade) &&
                        std::isfinite(tx_power_dbm) && std::isfinite(noise_psd_dbm_hz) &&
                        std::isfinite(bandwidth_hz) && std::isfinite(d_min_m);
    if (!finite) {
        throw ParameterError("path loss model: all parameters must be finite");
    }
    if (!(exponent() > 2.0)) {
        throw ParameterError("path loss model: exponent slope/10 must exceed 2");
    }
    if (!(bandwidth_hz > 0.0)) {
        throw ParameterError("path loss model: bandwidth must be positive");
    }
    if (!(d_min_m > 0.0)) {
        throw ParameterError("path loss model: d_min must be positive");
    }
}

GainTensor compute_gains(const CellLayout& layout, const DevicePlacement& placement, const PathLossModel& model) {
    model.validate();
    if (placement.num_devices() != layout.num_cells * placement.devices_per_cell) {
        throw ParameterError("compute_gains: placement does not match layout");
    }

    GainTensor out;
    out.gains.resize(layout.num_cells, placement.num_devices());
    for (int b = 0; b < layout.num_cells; ++b) {
        for (int i = 0; i < placement.num_devices(); ++i) {
            out.gains(b, i) = model.gain(distance(layout.bs_positions[b], placement.positions[i]));
        }
    }
    out.noise_var = model.noise_variance();
    return out;
}

double lemma3_sum(const GainTensor& gains, int cell) {
    if (cell < 0 || cell >= gains.num_cells()) {
        throw ParameterError("lemma3_sum: cell index out of range");
    }
    const int n = gains.devices_per_cell();
    double sum = 0.0;
    for (int j = 0; j < gains.num_cells(); ++j) {
        if (j != cell) {
            sum += gains.gains.row(cell).segment(j * n, n).maxCoeff();
        }
    }
    return sum;
}

std::vector<double> lemma3_ring_contributions(const CellLayout& layout, const GainTensor& gains, int cell) {
    if (cell < 0 || cell >= gains.num_cells() || layout.num_cells != gains.num_cells()) {
        throw ParameterError("lemma3_ring_contributions: inconsistent inputs");
    }
    const int n = gains.devices_per_cell();
    std::vector<double> rings(1, 0.0);
    for (int j = 0; j < gains.num_cells(); ++j) {
        if (j == cell) {
            continue;
        }
        const auto ring = static_cast<std::size_t>(layout.ring_between(cell, j));
        if (ring >= rings.size()) {
            rings.resize(ring + 1, 0.0);
        }
        rings[ring] += gains.gains.row(cell).segment(j * n, n).maxCoeff();
    }
    return rings;
}

} // namespace mcad
