#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowplan/domain.hpp"
#include "flowplan/geometry.hpp"
#include "flowplan/lbm.hpp"
#include "flowplan/sampler.hpp"
#include "flowplan/selector.hpp"
#include "flowplan/vehicle.hpp"

namespace flowplan {

/// One scripted actor: `route` waypoints trace its road, p1/p2/p3 follow
/// the scenario tables (initial position, speed/heading, and constant
/// accelerations in the actor's own road frame, longitudinal first).
struct ActorSpec {
    std::vector<Vec2> route;
    double x0 = 0.0;
    double y0 = 0.0;
    double speed0 = 0.0;       // signed [m/s]
    double heading0_deg = 0.0; // global frame [deg]
    double accel_s = 0.0;      // along motion [m/s^2]
    double accel_d = 0.0;      // lateral-left of motion [m/s^2]
};

struct ScenarioSpec {
    std::string name;
    char layout = 'a'; // a: bidirectional road, b: merge, c: T, d: 4-arm
    double duration = 20.0;           // [s]
    double nominal_speed = 20.0;      // [m/s]
    double intended_distance = 100.0; // [m] along the ego route
    std::uint64_t seed = 42;
    ActorSpec ev; // route + p2; initial position is the origin
    std::vector<ActorSpec> obstacles;
    std::vector<double> lane_markings; // offsets from the route centerline
};

struct ObstacleState {
    double x = 0.0, y = 0.0;
    double heading = 0.0; // [rad]
    double vx = 0.0, vy = 0.0;
    double speed = 0.0;
};

/// Constant-acceleration kinematics along the actor's own route, with the
/// speed floored at zero (vehicles never reverse).
class ObstacleMotion {
  public:
    ObstacleMotion(const ActorSpec& spec, double path_step);

    ObstacleState state_at(double t) const;
    /// Exact continuation over [t0, t0 + horizon] at the given cadence,
    /// projected into the ego route frame (invalid outside its band).
    ObstaclePrediction predict(double t0, double horizon, double cadence,
                               const ReferencePath& ev_path,
                               double band) const;

  private:
    void arc_at(double t, double& s, double& d, double& v) const;

    ReferencePath path_;
    double s0_ = 0.0, d0_ = 0.0;
    double v0_ = 0.0;    // signed along-route speed
    double accel_ = 0.0; // signed along-route acceleration
    double accel_d_ = 0.0;
    double t_stop_ = -1.0; // time the speed reaches zero, -1 if never
};

/// Time to reach center distance R under constant-velocity extrapolation;
/// nullopt when the pair is not on a collision course.
std::optional<double> compute_ttc(double ex, double ey, double evx, double evy,
                                  double ox, double oy, double ovx, double ovy,
                                  double radius);

struct PlannerConfig {
    DomainConfig domain;
    lbm::SolveParams solve;
    SamplerConfig sampler;
    CostWeights weights;
    VehicleParams vehicle;
    PerturbationSchedule schedule = PerturbationSchedule::default_grid();
    bool warm_start = true;
    int first_solve_iters = 200; // iteration cap for the cold first solve
    double ttc_radius = 2.5;     // [m]
    double path_resample = 0.5;  // [m]
};

struct StepRecord {
    double sim_time = 0.0;
    VehicleState ev;
    double ev_s = 0.0, ev_d = 0.0;
    ControlStep control;
    Accelerations accel;
    CostBreakdown cost;
    int selected = -1;
    int num_candidates = 0;
    int feasible_candidates = 0;
    double inv_ttc_sum = 0.0; // sum over obstacles of 1/TTC
    double min_ttc = -1.0;    // -1 when no obstacle is on a collision course
    std::vector<double> ov_distance;
    // wall-clock diagnostics; never part of determinism-compared output
    double ms_domain = 0.0, ms_solve = 0.0, ms_sample = 0.0, ms_select = 0.0;
    int lbm_iterations = 0;
    double mlups = 0.0;
    bool lbm_converged = false;
};

struct KpiReport {
    double k_s = 0.0;              // Eq.-style inverse-TTC average [1/s]
    double k_c_g = 0.0;            // weighted mean |accel| [g]
    double k_f = 1.0;              // non-saturated fraction
    double mean_abs_force_kn = 0.0;
    double min_speed = 0.0;
    double max_abs_lat_acc_g = 0.0;
    double progress = 0.0; // fraction of the intended distance
    bool steering_saturated = false;
    bool force_saturated = false;
    double mean_ms_domain = 0.0, mean_ms_solve = 0.0, mean_ms_sample = 0.0,
           mean_ms_select = 0.0, mean_ms_step = 0.0;
    double mean_mlups = 0.0;
    int steps = 0;
};

struct FieldSlice {
    int width = 0, height = 0;
    std::vector<double> vx, vy; // row-major slice vectors
};

struct RunLog {
    std::string scenario;
    std::uint64_t seed = 0;
    double dt = 0.1;
    std::vector<StepRecord> steps;
    bool collision = false;
    double collision_time = -1.0;
    bool reached_goal = false;
    bool left_road = false;
    KpiReport kpi;
    // (s,d) slice near t=0 and (s,t) slice at the ego lane, captured at
    // the first planning step for the quiver plots
    FieldSlice slice_sd, slice_st;
};

/// KPI postprocessing over a completed log. The comfort weights follow
/// the lateral-heavier convention (defaults c_lat = 1.0, c_lon = 0.5).
double kpi_safety(const RunLog& log);
double kpi_comfort(const RunLog& log, double c_lat = 1.0, double c_lon = 0.5);
double kpi_feasibility(const RunLog& log);
double kpi_effort(const RunLog& log); // mean |F_x| [kN]
KpiReport summarize(const RunLog& log, const ScenarioSpec& spec,
                    double start_s, double final_s);

/// Scripted world: obstacle motions plus the ego reference path.
class ScenarioWorld {
  public:
    ScenarioWorld(const ScenarioSpec& spec, const PlannerConfig& cfg);

    const ReferencePath& ev_path() const { return ev_path_; }
    const ScenarioSpec& spec() const { return spec_; }
    VehicleState initial_ev_state() const;

    std::vector<ObstacleState> obstacle_states(double t) const;
    std::vector<ObstaclePrediction> predictions(double t, double horizon,
                                                double cadence) const;

  private:
    ScenarioSpec spec_;
    ReferencePath ev_path_;
    std::vector<ObstacleMotion> obstacles_;
    double band_ = 0.0;
};

/// Receding-horizon loop: rebuild the domain, solve the field, sample and
/// select, apply the first control to the plant, log, repeat. Terminates
/// on the duration, route completion, or collision.
RunLog run_closed_loop(const ScenarioSpec& spec, const PlannerConfig& cfg);

} // namespace flowplan
