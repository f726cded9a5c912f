#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace flowplan {

/// Vector in domain axes: longitudinal (s), lateral (d), time (t).
struct Vec3 {
    double s = 0.0;
    double d = 0.0;
    double t = 0.0;

    double norm() const { return std::sqrt(s * s + d * d + t * t); }
};

struct GridDims {
    int ns = 0;
    int nd = 0;
    int nt = 0;

    std::size_t cells() const {
        return static_cast<std::size_t>(ns) * nd * nt;
    }
    // s is the fastest axis
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * nd + j) * ns + i;
    }
};

/// Spatiotemporal vector field: one unit 3-vector per lattice cell
/// (zero inside solids), nonnegative time component everywhere.
struct Stvf {
    GridDims dims;
    std::vector<Vec3> vectors;

    const Vec3& at(int i, int j, int k) const {
        return vectors[dims.index(i, j, k)];
    }
};

} // namespace flowplan
