#include "flowplan/vehicle.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowplan {

namespace {

// Relaxation rate for the low-speed kinematic fallback [1/s].
constexpr double kLowSpeedRelax = 5.0;

} // namespace

Accelerations forward_dynamics(const VehicleState& s, double fx, double delta,
                               const VehicleParams& p) {
    if (!std::isfinite(fx) || !std::isfinite(delta))
        throw std::invalid_argument("non-finite control input");

    Accelerations a;
    if (s.u <= p.u_min) {
        // Kinematic fallback: tire slip terms divide by u and are invalid
        // near standstill. Lateral states relax toward the kinematic values.
        a.u_dot = fx / p.mass;
        a.v_dot = -kLowSpeedRelax * s.v;
        const double r_kin =
            std::max(s.u, 0.0) * std::tan(delta) / p.wheelbase();
        a.r_dot = kLowSpeedRelax * (r_kin - s.r);
        return a;
    }

    const double atan_f = std::atan((s.v + p.lf * s.r) / s.u);
    const double atan_r = std::atan((s.v - p.lr * s.r) / s.u);
    const double kf = p.cf * p.mu_f;
    const double kr = p.cr * p.mu_r;

    a.u_dot = s.v * s.r + fx / p.mass;
    a.v_dot = -s.u * s.r + (kf / p.mass) * delta -
              (kf * atan_f + kr * atan_r) / p.mass;
    a.r_dot = (p.lf * kf / p.inertia_z) * delta -
              (p.lf * kf * atan_f - p.lr * kr * atan_r) / p.inertia_z;
    return a;
}

void yaw_rate_bounds(const VehicleState& s, double delta,
                     const VehicleParams& p, double& r_min, double& r_max) {
    // Linear-region slip limits:
    //   front: alpha_min <= (v + lf r)/u - delta <= alpha_max
    //   rear:  alpha_min <= (v - lr r)/u         <= alpha_max
    const double amax = p.alpha_max;
    const double amin = p.alpha_min();
    const double front_hi = ((amax + delta) * s.u - s.v) / p.lf;
    const double front_lo = ((amin + delta) * s.u - s.v) / p.lf;
    const double rear_hi = (s.v - amin * s.u) / p.lr;
    const double rear_lo = (s.v - amax * s.u) / p.lr;
    r_max = std::min(front_hi, rear_hi);
    r_min = std::max(front_lo, rear_lo);
}

ControlInput inverse_dynamics(const VehicleState& s, double u_dot_des,
                              double v_dot_des, const VehicleParams& p,
                              bool* slip_limited) {
    if (slip_limited) *slip_limited = false;

    ControlInput out;
    if (s.u <= p.u_min) {
        // Kinematic fallback: steer for the lateral acceleration of a
        // kinematic single track, force from the longitudinal demand.
        out.fx = p.mass * u_dot_des;
        const double u_eff = std::max(s.u, p.u_min);
        out.delta = std::atan(v_dot_des * p.wheelbase() / (u_eff * u_eff));
        return out;
    }

    const double atan_f = std::atan((s.v + p.lf * s.r) / s.u);
    const double atan_r = std::atan((s.v - p.lr * s.r) / s.u);
    const double kf = p.cf * p.mu_f;
    const double kr = p.cr * p.mu_r;

    out.fx = p.mass * (u_dot_des - s.v * s.r);
    out.delta =
        (p.mass * (v_dot_des + s.u * s.r) + kf * atan_f + kr * atan_r) / kf;

    double r_dot = (p.lf * kf / p.inertia_z) * out.delta -
                   (p.lf * kf * atan_f - p.lr * kr * atan_r) / p.inertia_z;

    double r_min = 0.0, r_max = 0.0;
    yaw_rate_bounds(s, out.delta, p, r_min, r_max);
    // When the yaw rate already violates the slip bounds and would keep
    // growing in magnitude, freeze it and re-derive the steering angle.
    if ((s.r < r_min || s.r > r_max) && s.r * r_dot > 0.0) {
        r_dot = 0.0;
        out.delta = (p.lf * kf * atan_f - p.lr * kr * atan_r) / (p.lf * kf);
        if (slip_limited) *slip_limited = true;
    }
    return out;
}

ControlInput saturate(const ControlInput& in, const VehicleParams& p,
                      SaturationFlags* flags) {
    ControlInput out = in;
    SaturationFlags f;
    if (out.fx > p.f_max) { out.fx = p.f_max; f.fx = true; }
    if (out.fx < -p.f_max) { out.fx = -p.f_max; f.fx = true; }
    if (out.delta > p.delta_max) { out.delta = p.delta_max; f.delta = true; }
    if (out.delta < -p.delta_max) { out.delta = -p.delta_max; f.delta = true; }
    if (flags) *flags = f;
    return out;
}

VehicleState integrate(const VehicleState& s, const Accelerations& a,
                       double dt, int substeps) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    substeps = std::max(1, substeps);
    const double h = dt / substeps;

    VehicleState out = s;
    for (int i = 0; i < substeps; ++i) {
        out.u += a.u_dot * h;
        out.v += a.v_dot * h;
        out.r += a.r_dot * h;
        out.x += (out.u * std::cos(out.psi) - out.v * std::sin(out.psi)) * h;
        out.y += (out.u * std::sin(out.psi) + out.v * std::cos(out.psi)) * h;
        out.psi += out.r * h;
    }
    return out;
}

} // namespace flowplan
