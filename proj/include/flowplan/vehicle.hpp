#pragma once

#include <cmath>

namespace flowplan {

/// Single-track (bicycle) model parameters. Defaults describe a mid-size
/// sedan; all values are configurable and not tied to any particular car.
struct VehicleParams {
    double mass = 1500.0;          // [kg]
    double inertia_z = 2500.0;     // [kg m^2]
    double lf = 1.2;               // CoG to front axle [m]
    double lr = 1.6;               // CoG to rear axle [m]
    double cf = 80000.0;           // front cornering stiffness [N/rad]
    double cr = 80000.0;           // rear cornering stiffness [N/rad]
    double mu_f = 1.0;             // front friction coefficient
    double mu_r = 1.0;             // rear friction coefficient
    double f_max = 8000.0;         // |F_x| limit [N]
    double delta_max = 0.5235987755982988; // |steering| limit, 30 deg [rad]
    double alpha_max = 0.06981317007977318; // slip-angle limit, 4 deg [rad]
    double u_min = 0.5;            // below this, kinematic fallback [m/s]

    double alpha_min() const { return -alpha_max; }
    double wheelbase() const { return lf + lr; }
};

/// Planar vehicle state: world pose plus body-frame velocities.
struct VehicleState {
    double x = 0.0;   // [m]
    double y = 0.0;   // [m]
    double psi = 0.0; // yaw [rad]
    double u = 0.0;   // longitudinal velocity [m/s]
    double v = 0.0;   // lateral velocity [m/s]
    double r = 0.0;   // yaw rate [rad/s]
};

struct Accelerations {
    double u_dot = 0.0; // [m/s^2]
    double v_dot = 0.0; // [m/s^2]
    double r_dot = 0.0; // [rad/s^2]
};

struct ControlInput {
    double fx = 0.0;    // longitudinal tire force [N]
    double delta = 0.0; // front steering angle [rad]
};

struct SaturationFlags {
    bool fx = false;
    bool delta = false;
    bool any() const { return fx || delta; }
};

/// Rates of change of (u, v, r) for the nonlinear single-track model.
/// Falls back to a kinematic model below p.u_min.
Accelerations forward_dynamics(const VehicleState& s, double fx, double delta,
                               const VehicleParams& p);

/// Control inputs achieving the requested body-frame accelerations.
/// Clamps the yaw dynamics when the yaw rate is outside the linear-region
/// slip bounds and still growing; `slip_limited` reports that case.
ControlInput inverse_dynamics(const VehicleState& s, double u_dot_des,
                              double v_dot_des, const VehicleParams& p,
                              bool* slip_limited = nullptr);

/// Yaw-rate interval implied by the tire slip-angle limits at this state
/// and steering angle. Front and rear constraints are intersected.
void yaw_rate_bounds(const VehicleState& s, double delta,
                     const VehicleParams& p, double& r_min, double& r_max);

ControlInput saturate(const ControlInput& in, const VehicleParams& p,
                      SaturationFlags* flags = nullptr);

/// Semi-implicit Euler: velocities first, then pose, in `substeps`
/// sub-intervals with the accelerations held constant.
VehicleState integrate(const VehicleState& s, const Accelerations& a,
                       double dt, int substeps = 10);

} // namespace flowplan
