#pragma once

#include <cstdint>
#include <vector>

#include "flowplan/field.hpp"
#include "flowplan/geometry.hpp"
#include "flowplan/vehicle.hpp"

namespace flowplan {

/// Discretization of the spatiotemporal flow domain. Defaults give
/// 128 x 64 x 64 cells of 2.0 m x 0.1 m x 0.1 s over a 256 m x 6.4 m
/// window and a 6.4 s horizon.
struct DomainConfig {
    double s_extent = 256.0;  // [m]
    double d_extent = 6.4;    // [m]
    double horizon = 6.4;     // [s]
    int ns = 128;
    int nd = 64;
    int nt = 64;
    double s_behind = 30.0;       // window start behind the ego [m]
    double nominal_speed = 20.0;  // road nominal speed [m/s]
    double porous_resistance = 0.5; // blocked fraction of marking sheets
    std::uint64_t seed = 42;

    // speed clamps applied before boundary-vector conversion
    double max_s_speed = 70.0; // [m/s]
    double max_d_speed = 10.0; // [m/s]

    // obstacle footprint before margin inflation
    double obstacle_length = 5.0; // [m]
    double obstacle_width = 2.0;  // [m]
    double obstacle_margin = 0.5; // per side [m]

    double cell_s() const { return s_extent / ns; }
    double cell_d() const { return d_extent / nd; }
    double cell_t() const { return horizon / nt; }
    GridDims dims() const { return GridDims{ns, nd, nt}; }
};

enum class CellClass : std::uint8_t {
    Fluid = 0,
    Solid = 1,       // occupied space and road-boundary walls
    PorousSolid = 2, // blocked cells of a lane-marking sheet
    Boundary = 3,    // prescribed-velocity face cell
};

/// Predicted obstacle trajectory in the ego route's Frenet frame,
/// sampled at the planner period. `s` is absolute path arc length,
/// `d` is signed offset from the route centerline. Samples outside the
/// route's lateral band are marked invalid.
struct PredictionSample {
    double t = 0.0;
    double s = 0.0;
    double d = 0.0;
    bool valid = false;
};

struct ObstaclePrediction {
    std::vector<PredictionSample> samples; // uniform cadence from t = 0
};

/// Discretized boundary-value problem: per-cell class, prescribed
/// boundary vectors, and the curvature basis of the body-force field.
struct FluidDomainSpec {
    DomainConfig config;
    double window_origin_s = 0.0; // path arc at domain s = 0
    std::vector<CellClass> cell_class;     // dims().cells()
    std::vector<Vec3> boundary_velocity;   // unit vectors at Boundary cells
    std::vector<double> curvature;         // per s index, path curvature

    std::size_t index(int i, int j, int k) const {
        return config.dims().index(i, j, k);
    }
    CellClass cls(int i, int j, int k) const {
        return cell_class[index(i, j, k)];
    }
};

/// Lateral acceleration field sourced by route curvature: centrifugal on
/// the lateral channel, Coriolis on the longitudinal one. Units follow
/// the inputs (density-weighted accelerations).
struct BodyForce {
    double f_s = 0.0;
    double f_d = 0.0;
};

inline BodyForce body_force(double kappa, double rho, double s_dot,
                            double d_dot) {
    return BodyForce{2.0 * rho * kappa * s_dot * d_dot,
                     rho * kappa * s_dot * s_dot};
}

/// Converts Frenet speeds into the unit spatiotemporal direction of one
/// cell step. Speeds are clamped to the configured maxima; the time
/// component is always positive.
Vec3 boundary_vector_from_speed(double s_dot, double d_dot,
                                const DomainConfig& cfg);

/// Builds the discretized flow problem from the driving context: walls at
/// the lateral faces, velocity conditions on the remaining faces (ego
/// speed at t=0, nominal road speed elsewhere), obstacle predictions
/// rasterized as solid columns, and lane markings as porous sheets.
/// `lane_markings` holds lateral offsets from the route centerline.
FluidDomainSpec build_domain(const ReferencePath& path,
                             const VehicleState& ev,
                             const std::vector<ObstaclePrediction>& predictions,
                             const std::vector<double>& lane_markings,
                             const DomainConfig& cfg);

} // namespace flowplan
