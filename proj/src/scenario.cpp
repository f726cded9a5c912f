#include "flowplan/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace flowplan {

namespace {

constexpr double kGravity = 9.81;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Separating-axis overlap test for two oriented rectangles.
bool rects_overlap(double ax, double ay, double ah, double alen, double awid,
                   double bx, double by, double bh, double blen, double bwid) {
    const double axes[4][2] = {{std::cos(ah), std::sin(ah)},
                               {-std::sin(ah), std::cos(ah)},
                               {std::cos(bh), std::sin(bh)},
                               {-std::sin(bh), std::cos(bh)}};
    const double half[2][2] = {{alen / 2.0, awid / 2.0},
                               {blen / 2.0, bwid / 2.0}};
    const double ctr[2][2] = {{ax, ay}, {bx, by}};
    const double hdg[2] = {ah, bh};
    for (const auto& axis : axes) {
        double proj[2][2]; // [rect][min/max]
        for (int rct = 0; rct < 2; ++rct) {
            const double c = std::cos(hdg[rct]);
            const double s = std::sin(hdg[rct]);
            const double center = ctr[rct][0] * axis[0] + ctr[rct][1] * axis[1];
            const double e1 = std::abs((c * axis[0] + s * axis[1]) * half[rct][0]);
            const double e2 = std::abs((-s * axis[0] + c * axis[1]) * half[rct][1]);
            proj[rct][0] = center - e1 - e2;
            proj[rct][1] = center + e1 + e2;
        }
        if (proj[0][1] < proj[1][0] || proj[1][1] < proj[0][0]) return false;
    }
    return true;
}

} // namespace

ObstacleMotion::ObstacleMotion(const ActorSpec& spec, double path_step)
    : path_(build_reference_path(spec.route, path_step)) {
    const auto fp = path_.project(spec.x0, spec.y0, 10.0);
    if (!fp)
        throw std::invalid_argument("obstacle initial position off its route");
    s0_ = fp->s;
    d0_ = fp->d;

    const double psi = spec.heading0_deg * kDegToRad;
    const double tangent = path_.heading_at(s0_);
    const double align =
        std::cos(tangent) * std::cos(psi) + std::sin(tangent) * std::sin(psi);
    const double dir = align >= 0.0 ? 1.0 : -1.0;
    v0_ = spec.speed0 * dir;
    const double motion = v0_ > 0.0 ? 1.0 : (v0_ < 0.0 ? -1.0 : dir);
    accel_ = spec.accel_s * motion;
    accel_d_ = spec.accel_d * motion;

    // the speed magnitude hits zero when accel opposes motion
    t_stop_ = -1.0;
    if (v0_ != 0.0 && accel_ != 0.0 && v0_ * accel_ < 0.0)
        t_stop_ = -v0_ / accel_;
    if (v0_ == 0.0 && accel_ == 0.0) t_stop_ = 0.0;
}

void ObstacleMotion::arc_at(double t, double& s, double& d, double& v) const {
    double te = t;
    if (t_stop_ >= 0.0 && t > t_stop_) te = t_stop_;
    s = s0_ + v0_ * te + 0.5 * accel_ * te * te;
    v = v0_ + accel_ * te;
    if (t_stop_ >= 0.0 && t >= t_stop_) v = 0.0;
    d = d0_ + 0.5 * accel_d_ * te * te;
}

ObstacleState ObstacleMotion::state_at(double t) const {
    double s, d, v;
    arc_at(t, s, d, v);
    ObstacleState out;
    double heading;
    path_.to_cartesian(FrenetPose{std::clamp(s, 0.0, path_.total_length()), d,
                                  0.0, 0.0},
                       out.x, out.y, heading);
    const double dir = v < 0.0 ? -1.0 : (v > 0.0 ? 1.0 : (v0_ < 0.0 ? -1.0 : 1.0));
    out.heading = dir > 0.0 ? heading : heading + 3.14159265358979323846;
    out.speed = std::abs(v);
    out.vx = v * std::cos(heading);
    out.vy = v * std::sin(heading);
    return out;
}

ObstaclePrediction ObstacleMotion::predict(double t0, double horizon,
                                           double cadence,
                                           const ReferencePath& ev_path,
                                           double band) const {
    ObstaclePrediction pred;
    const int n = static_cast<int>(std::round(horizon / cadence));
    pred.samples.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double tau = k * cadence;
        const ObstacleState os = state_at(t0 + tau);
        PredictionSample ps;
        ps.t = tau;
        if (auto fp = ev_path.project(os.x, os.y, band)) {
            ps.s = fp->s;
            ps.d = fp->d;
            ps.valid = true;
        }
        pred.samples.push_back(ps);
    }
    return pred;
}

std::optional<double> compute_ttc(double ex, double ey, double evx, double evy,
                                  double ox, double oy, double ovx, double ovy,
                                  double radius) {
    const double px = ox - ex;
    const double py = oy - ey;
    const double wx = ovx - evx;
    const double wy = ovy - evy;
    const double a = wx * wx + wy * wy;
    const double b = 2.0 * (px * wx + py * wy);
    const double c = px * px + py * py - radius * radius;
    if (c <= 0.0) return 0.0; // already inside the safety radius
    if (b >= 0.0) return std::nullopt; // range not closing
    if (a < 1e-12) return std::nullopt;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt; // misses by more than the radius
    return (-b - std::sqrt(disc)) / (2.0 * a);
}

ScenarioWorld::ScenarioWorld(const ScenarioSpec& spec, const PlannerConfig& cfg)
    : spec_(spec),
      ev_path_(build_reference_path(spec.ev.route, cfg.path_resample)),
      band_(cfg.domain.d_extent / 2.0 + cfg.domain.obstacle_length) {
    for (const auto& ov : spec.obstacles)
        obstacles_.emplace_back(ov, cfg.path_resample);
}

VehicleState ScenarioWorld::initial_ev_state() const {
    VehicleState st;
    st.x = 0.0;
    st.y = 0.0;
    st.psi = spec_.ev.heading0_deg * kDegToRad;
    st.u = spec_.ev.speed0;
    return st;
}

std::vector<ObstacleState> ScenarioWorld::obstacle_states(double t) const {
    std::vector<ObstacleState> out;
    out.reserve(obstacles_.size());
    for (const auto& ov : obstacles_) out.push_back(ov.state_at(t));
    return out;
}

std::vector<ObstaclePrediction>
ScenarioWorld::predictions(double t, double horizon, double cadence) const {
    std::vector<ObstaclePrediction> out;
    out.reserve(obstacles_.size());
    for (const auto& ov : obstacles_)
        out.push_back(ov.predict(t, horizon, cadence, ev_path_, band_));
    return out;
}

double kpi_safety(const RunLog& log) {
    if (log.steps.empty()) return 0.0;
    std::size_t m = 0;
    for (const auto& s : log.steps) m = std::max(m, s.ov_distance.size());
    if (m == 0) return 0.0;
    double sum = 0.0;
    for (const auto& s : log.steps) sum += s.inv_ttc_sum;
    return sum / (static_cast<double>(m) * log.steps.size());
}

double kpi_comfort(const RunLog& log, double c_lat, double c_lon) {
    if (log.steps.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : log.steps)
        sum += c_lat * std::abs(s.accel.v_dot) + c_lon * std::abs(s.accel.u_dot);
    return sum / log.steps.size() / kGravity;
}

double kpi_feasibility(const RunLog& log) {
    if (log.steps.empty()) return 1.0;
    double sum = 0.0;
    for (const auto& s : log.steps) {
        sum += s.control.saturation.fx ? 0.0 : 1.0;
        sum += s.control.saturation.delta ? 0.0 : 1.0;
    }
    return sum / (2.0 * log.steps.size());
}

double kpi_effort(const RunLog& log) {
    if (log.steps.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : log.steps) sum += std::abs(s.control.fx);
    return sum / log.steps.size() / 1000.0;
}

KpiReport summarize(const RunLog& log, const ScenarioSpec& spec,
                    double start_s, double final_s) {
    KpiReport k;
    k.steps = static_cast<int>(log.steps.size());
    k.k_s = kpi_safety(log);
    k.k_c_g = kpi_comfort(log);
    k.k_f = kpi_feasibility(log);
    k.mean_abs_force_kn = kpi_effort(log);
    k.progress = spec.intended_distance > 0.0
                     ? std::max(0.0, final_s - start_s) / spec.intended_distance
                     : 1.0;
    k.min_speed = 0.0;
    if (!log.steps.empty()) {
        double mn = 1e30, mx = 0.0;
        for (const auto& s : log.steps) {
            mn = std::min(mn, s.ev.u);
            mx = std::max(mx, std::abs(s.accel.v_dot));
            k.steering_saturated |= s.control.saturation.delta;
            k.force_saturated |= s.control.saturation.fx;
            k.mean_ms_domain += s.ms_domain;
            k.mean_ms_solve += s.ms_solve;
            k.mean_ms_sample += s.ms_sample;
            k.mean_ms_select += s.ms_select;
            k.mean_mlups += s.mlups;
        }
        k.min_speed = mn;
        k.max_abs_lat_acc_g = mx / kGravity;
        const double n = static_cast<double>(log.steps.size());
        k.mean_ms_domain /= n;
        k.mean_ms_solve /= n;
        k.mean_ms_sample /= n;
        k.mean_ms_select /= n;
        k.mean_mlups /= n;
        k.mean_ms_step = k.mean_ms_domain + k.mean_ms_solve + k.mean_ms_sample +
                         k.mean_ms_select;
    }
    return k;
}

RunLog run_closed_loop(const ScenarioSpec& spec, const PlannerConfig& cfg) {
    PlannerConfig pc = cfg;
    pc.domain.nominal_speed = spec.nominal_speed;
    pc.domain.seed = spec.seed;

    ScenarioWorld world(spec, pc);
    const ReferencePath& path = world.ev_path();

    RunLog log;
    log.scenario = spec.name;
    log.seed = spec.seed;
    log.dt = pc.sampler.dt;

    VehicleState plant = world.initial_ev_state();
    const auto fp_start = path.project(plant.x, plant.y, pc.domain.d_extent);
    if (!fp_start) throw std::invalid_argument("ego origin is off the route");
    const double start_s = fp_start->s;
    double current_s = start_s;

    const int max_steps =
        static_cast<int>(std::round(spec.duration / pc.sampler.dt));
    ControlStep prev_control;
    std::vector<Vec3> warm_field;
    double warm_origin = 0.0;
    bool have_warm = false;

    for (int step = 0; step < max_steps; ++step) {
        const double t = step * pc.sampler.dt;

        const double t0 = now_ms();
        const auto preds =
            world.predictions(t, pc.domain.horizon, pc.sampler.dt);
        FluidDomainSpec domain =
            build_domain(path, plant, preds, spec.lane_markings, pc.domain);
        const double t1 = now_ms();

        lbm::SolveParams sp = pc.solve;
        const std::vector<Vec3>* init = nullptr;
        std::vector<Vec3> shifted;
        if (pc.warm_start && have_warm) {
            // re-seed from the previous field, shifted one slice along t
            // and the window displacement along s
            const GridDims dims = pc.domain.dims();
            const int si = static_cast<int>(std::round(
                (domain.window_origin_s - warm_origin) / pc.domain.cell_s()));
            shifted.resize(dims.cells());
            for (int k = 0; k < dims.nt; ++k)
                for (int j = 0; j < dims.nd; ++j)
                    for (int i = 0; i < dims.ns; ++i) {
                        const int isrc = std::clamp(i + si, 0, dims.ns - 1);
                        const int ksrc = std::min(k + 1, dims.nt - 1);
                        shifted[dims.index(i, j, k)] =
                            warm_field[dims.index(isrc, j, ksrc)];
                    }
            init = &shifted;
        } else {
            sp.max_iters = std::max(pc.solve.max_iters, pc.first_solve_iters);
        }
        lbm::SolveResult sol = lbm::solve(domain, sp, init);
        const double t2 = now_ms();
        if (sol.diverged)
            throw std::runtime_error("lbm solve diverged (|V| > limit)");

        const auto candidates = sample_trajectories(
            plant, sol.stvf, domain, path, pc.vehicle, pc.sampler, pc.schedule);
        const double t3 = now_ms();

        std::vector<CostBreakdown> costs(candidates.size());
        int feasible = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            costs[i] = total_cost(candidates[i].trajectory,
                                  candidates[i].controls, sol.stvf, domain,
                                  pc.weights, pc.sampler.dt,
                                  step > 0 ? &prev_control : nullptr);
            if (costs[i].feasible) ++feasible;
        }
        const int best = select_best(costs);
        const double t4 = now_ms();

        StepRecord rec;
        rec.sim_time = t;
        rec.selected = best;
        rec.num_candidates = static_cast<int>(candidates.size());
        rec.feasible_candidates = feasible;
        if (best >= 0) {
            rec.control = candidates[best].controls.inputs.front();
            rec.cost = costs[best];
        } else {
            // no feasible candidate: maximum braking, wheel centered
            rec.control.fx = plant.u > 0.0 ? -pc.vehicle.f_max : 0.0;
            rec.control.delta = 0.0;
            rec.cost.feasible = false;
        }

        const Accelerations acc =
            forward_dynamics(plant, rec.control.fx, rec.control.delta,
                             pc.vehicle);
        plant = integrate(plant, acc, pc.sampler.dt);
        rec.accel = acc;
        rec.ev = plant;

        const auto fp = path.project(plant.x, plant.y, pc.domain.d_extent);
        if (fp) {
            rec.ev_s = fp->s;
            rec.ev_d = fp->d;
            current_s = fp->s;
        } else {
            log.left_road = true;
        }

        // safety bookkeeping + collision check at the new time
        const double t_next = t + pc.sampler.dt;
        const auto ovs = world.obstacle_states(t_next);
        const double evx = plant.u * std::cos(plant.psi) -
                           plant.v * std::sin(plant.psi);
        const double evy = plant.u * std::sin(plant.psi) +
                           plant.v * std::cos(plant.psi);
        double min_ttc = -1.0;
        for (const auto& ov : ovs) {
            rec.ov_distance.push_back(
                std::hypot(ov.x - plant.x, ov.y - plant.y));
            const auto ttc = compute_ttc(plant.x, plant.y, evx, evy, ov.x,
                                         ov.y, ov.vx, ov.vy, pc.ttc_radius);
            if (ttc && *ttc > 1e-6) {
                rec.inv_ttc_sum += 1.0 / *ttc;
                if (min_ttc < 0.0 || *ttc < min_ttc) min_ttc = *ttc;
            }
            if (rects_overlap(plant.x, plant.y, plant.psi,
                              pc.domain.obstacle_length,
                              pc.domain.obstacle_width, ov.x, ov.y,
                              ov.heading, pc.domain.obstacle_length,
                              pc.domain.obstacle_width)) {
                log.collision = true;
                log.collision_time = t_next;
            }
        }
        rec.min_ttc = min_ttc;

        rec.ms_domain = t1 - t0;
        rec.ms_solve = t2 - t1;
        rec.ms_sample = t3 - t2;
        rec.ms_select = t4 - t3;
        rec.lbm_iterations = sol.iterations;
        rec.mlups = sol.mlups;
        rec.lbm_converged = sol.converged;

        if (step == 0) {
            // capture quiver slices for the reports
            const GridDims dims = sol.stvf.dims;
            log.slice_sd.width = dims.ns;
            log.slice_sd.height = dims.nd;
            for (int j = 0; j < dims.nd; ++j)
                for (int i = 0; i < dims.ns; ++i) {
                    const Vec3& v = sol.stvf.at(i, j, std::min(1, dims.nt - 1));
                    log.slice_sd.vx.push_back(v.s);
                    log.slice_sd.vy.push_back(v.d);
                }
            const int j_ev = std::clamp(
                static_cast<int>((rec.ev_d + pc.domain.d_extent / 2.0) /
                                 pc.domain.cell_d()),
                0, dims.nd - 1);
            log.slice_st.width = dims.ns;
            log.slice_st.height = dims.nt;
            for (int k = 0; k < dims.nt; ++k)
                for (int i = 0; i < dims.ns; ++i) {
                    const Vec3& v = sol.stvf.at(i, j_ev, k);
                    log.slice_st.vx.push_back(v.s);
                    log.slice_st.vy.push_back(v.t);
                }
        }

        prev_control = rec.control;
        log.steps.push_back(std::move(rec));

        if (pc.warm_start) {
            warm_field = std::move(sol.velocity);
            warm_origin = domain.window_origin_s;
            have_warm = !warm_field.empty();
        }

        if (log.collision) break;
        if (current_s - start_s >= spec.intended_distance) {
            log.reached_goal = true;
            break;
        }
        if (log.left_road) break;
    }

    log.kpi = summarize(log, spec, start_s, current_s);
    return log;
}

} // namespace flowplan
