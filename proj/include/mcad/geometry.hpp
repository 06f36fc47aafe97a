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

#ifndef MCAD_GEOMETRY_HPP
#define MCAD_GEOMETRY_HPP

#include "mcad/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mcad {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct AxialCoord {
    int q = 0;
    int r = 0;
};

int hex_distance(AxialCoord a, AxialCoord b);

/// Hexagonal multi-cell layout with pointy-top cells of circumradius
/// `radius_m`. Cells are enumerated in spiral order: the center cell, then
/// ring 1, ring 2, ... each ring walked in a fixed angular order, truncated to
/// `num_cells`. Adjacent centers are sqrt(3) * radius_m apart.
struct CellLayout {
    int num_cells = 0;
    double radius_m = 0.0;
    std::vector<Point> bs_positions;
    std::vector<AxialCoord> axial;

    /// Ring index of cell `j` as seen from cell `b` (hexagonal hop count).
    int ring_between(int b, int j) const { return hex_distance(axial[b], axial[j]); }
};

CellLayout build_hex_layout(int num_cells, double radius_m);

/// True when `p` lies inside (or on the boundary of) the pointy-top hexagon
/// centered at `center`.
bool inside_hexagon(Point p, Point center, double radius_m);

/// Device positions, cell-major: device (j, n) has flat index j * N + n.
struct DevicePlacement {
    int devices_per_cell = 0;
    std::vector<Point> positions;
    std::vector<int> home_cell;

    int num_devices() const { return static_cast<int>(positions.size()); }
};

DevicePlacement place_devices(const CellLayout& layout, int devices_per_cell, Rng& rng, double d_min_m = 5.0);

/// Log-distance path loss PL(d) = pl_db_at_1km + slope_db_per_decade * log10(d / 1 km),
/// with distances clamped below at d_min_m.
struct PathLossModel {
    double pl_db_at_1km = 128.1;
    double slope_db_per_decade = 37.6;
    double tx_power_dbm = 23.0;
    double noise_psd_dbm_hz = -169.0;
    double bandwidth_hz = 1e7;
    double d_min_m = 5.0;

    double exponent() const { return slope_db_per_decade / 10.0; }
    double path_loss_db(double distance_m) const;
    /// Transmit-power-normalized linear gain.
    double gain(double distance_m) const;
    /// Noise variance normalized by the transmit power.
    double noise_variance() const;
    void validate() const;

    bool operator==(const PathLossModel&) const = default;
};

/// Large-scale fading gains. Row b is the diagonal of G_b: gains(b, i) is the
/// gain from device i to BS b.
struct GainTensor {
    Eigen::MatrixXd gains;
    double noise_var = 0.0;

    int num_cells() const { return static_cast<int>(gains.rows()); }
    int num_devices() const { return static_cast<int>(gains.cols()); }
    int devices_per_cell() const { return num_devices() / num_cells(); }
};

GainTensor compute_gains(const CellLayout& layout, const DevicePlacement& placement, const PathLossModel& model);

/// Sum over interfering cells j != cell of the strongest gain from cell j's
/// devices to BS `cell`.
double lemma3_sum(const GainTensor& gains, int cell);

/// The same sum split by ring distance from `cell`. Entry r is the
/// contribution of ring r; entry 0 is always zero.
std::vector<double> lemma3_ring_contributions(const CellLayout& layout, const GainTensor& gains, int cell);

} // namespace mcad

#endif
