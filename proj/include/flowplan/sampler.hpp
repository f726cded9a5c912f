#pragma once

#include <utility>
#include <vector>

#include "flowplan/domain.hpp"
#include "flowplan/field.hpp"
#include "flowplan/geometry.hpp"
#include "flowplan/vehicle.hpp"

namespace flowplan {

/// One rolled-out candidate: vehicle states at each step plus the
/// dead-reckoned Frenet trace that generated them.
struct TrajectoryPoint {
    VehicleState state;
    double s = 0.0;     // absolute path arc [m]
    double d = 0.0;     // offset from the route centerline [m]
    double s_dot = 0.0; // [m/s]
    double d_dot = 0.0; // [m/s]
};

struct Trajectory {
    std::vector<TrajectoryPoint> points; // horizon steps + 1 entries
    std::vector<Accelerations> accels;   // realized rates per step
    bool feasible = true;
    int truncated_at = -1; // step index where the roll-out left the band
};

struct ControlStep {
    double fx = 0.0;
    double delta = 0.0;
    SaturationFlags saturation;
};

struct ControlSequence {
    std::vector<ControlStep> inputs;
    bool any_saturated() const {
        for (const auto& c : inputs)
            if (c.saturation.any()) return true;
        return false;
    }
};

struct Candidate {
    Trajectory trajectory;
    ControlSequence controls;
};

/// Multiplicative perturbations (gamma_i, eta_i) applied to the
/// interpolated field velocities; the first pair is always the identity,
/// so candidate 0 is the pure streamline.
struct PerturbationSchedule {
    std::vector<std::pair<double, double>> pairs;

    /// Deterministic grid: gamma in {0.85, 1.0, 1.15} x eta in
    /// {0.6, 0.8, 1.0, 1.2, 1.4}, identity first (15 candidates).
    static PerturbationSchedule default_grid();
};

struct SamplerConfig {
    double dt = 0.1;   // [s]
    int steps = 64;    // horizon / dt
    bool centripetal_double = false; // use 2*kappa*s_dot^2 on the d channel
    int sg_window = 5; // causal Savitzky-Golay window (order 2)
    double lateral_margin = 0.2; // feasibility inset from the walls [m]
};

/// Physical Frenet velocities interpolated from the field at a
/// domain-relative query point. `clamped` reports an out-of-domain query
/// that was clamped onto the boundary.
struct FieldSample {
    double s_dot = 0.0;
    double d_dot = 0.0;
    bool clamped = false;
};

/// Trilinear blend of the eight surrounding cell vectors (solid cells
/// contribute zero), renormalized and converted into physical speeds.
FieldSample interpolate_field(const Stvf& stvf, const DomainConfig& cfg,
                              double s_dom, double d_dom, double t);

/// Frenet accelerations from two consecutive velocity samples: finite
/// difference plus the Coriolis term on s and the centripetal term on d.
void frenet_accels(double s_dot, double d_dot, double s_dot_next,
                   double d_dot_next, double kappa, double dt,
                   double& s_ddot, double& d_ddot,
                   bool centripetal_double = false);

/// Causal Savitzky-Golay (order 2) derivative over the trailing window;
/// falls back to the two-point difference until enough samples exist.
class RateEstimator {
  public:
    RateEstimator(int window, double dt);
    void reset();
    void push(double value);
    /// Derivative of the sequence [history..., next] at `next`.
    double rate(double next) const;

  private:
    int window_;
    double dt_;
    std::vector<double> coeffs_; // newest-last derivative weights
    std::vector<double> hist_;
};

/// Vector-field-guided roll-outs: one candidate per schedule pair. Each
/// step looks the field up at the dead-reckoned next position, converts
/// the demanded Frenet accelerations into body-frame ones, and runs them
/// through inverse dynamics, saturation, and forward dynamics.
std::vector<Candidate> sample_trajectories(
    const VehicleState& initial, const Stvf& stvf,
    const FluidDomainSpec& domain, const ReferencePath& path,
    const VehicleParams& vp, const SamplerConfig& cfg,
    const PerturbationSchedule& schedule);

} // namespace flowplan
