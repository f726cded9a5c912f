#include "flowplan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowplan {

namespace {

// Floor on the normalized time component when converting field vectors
// to speeds; bounds the slope of near-stagnant cells.
constexpr double kTimeFloor = 0.05;

// Solves the 3x3 normal equations of a quadratic least-squares fit over
// x = {-(w-1)..0} and returns the derivative-at-newest weights.
std::vector<double> sg_derivative_weights(int w) {
    double g[3][3] = {};
    for (int m = 0; m < w; ++m) {
        const double x = static_cast<double>(m - (w - 1));
        const double p[3] = {1.0, x, x * x};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) g[a][b] += p[a] * p[b];
    }
    // invert g by Gauss-Jordan
    double inv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        std::swap(g[col], g[piv]);
        std::swap(inv[col], inv[piv]);
        const double diag = g[col][col];
        for (int cc = 0; cc < 3; ++cc) {
            g[col][cc] /= diag;
            inv[col][cc] /= diag;
        }
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = g[r][col];
            for (int cc = 0; cc < 3; ++cc) {
                g[r][cc] -= f * g[col][cc];
                inv[r][cc] -= f * inv[col][cc];
            }
        }
    }
    // row of (G^-1 V^T) corresponding to the linear term
    std::vector<double> c(w);
    for (int m = 0; m < w; ++m) {
        const double x = static_cast<double>(m - (w - 1));
        c[m] = inv[1][0] + inv[1][1] * x + inv[1][2] * x * x;
    }
    return c;
}

} // namespace

PerturbationSchedule PerturbationSchedule::default_grid() {
    PerturbationSchedule s;
    s.pairs.emplace_back(1.0, 1.0);
    const double gammas[] = {0.85, 1.0, 1.15};
    const double etas[] = {0.6, 0.8, 1.0, 1.2, 1.4};
    for (double g : gammas)
        for (double e : etas) {
            if (g == 1.0 && e == 1.0) continue;
            s.pairs.emplace_back(g, e);
        }
    return s;
}

FieldSample interpolate_field(const Stvf& stvf, const DomainConfig& cfg,
                              double s_dom, double d_dom, double t) {
    FieldSample out;
    const double gs = s_dom / cfg.cell_s() - 0.5;
    const double gd = d_dom / cfg.cell_d() - 0.5;
    const double gt = t / cfg.cell_t() - 0.5;
    out.clamped = (s_dom < 0.0 || s_dom > cfg.s_extent || d_dom < 0.0 ||
                   d_dom > cfg.d_extent || t < 0.0 || t > cfg.horizon);

    auto split = [](double g, int n, int& lo, double& w) {
        lo = static_cast<int>(std::floor(g));
        w = g - lo;
        if (lo < 0) { lo = 0; w = 0.0; }
        if (lo > n - 2) { lo = n - 2; w = 1.0; }
    };
    int i0, j0, k0;
    double ws, wd, wt;
    split(gs, cfg.ns, i0, ws);
    split(gd, cfg.nd, j0, wd);
    split(gt, cfg.nt, k0, wt);

    Vec3 v{};
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? ws : 1.0 - ws) * (dj ? wd : 1.0 - wd) *
                                 (dk ? wt : 1.0 - wt);
                if (w == 0.0) continue;
                const Vec3& c = stvf.at(i0 + di, j0 + dj, k0 + dk);
                v.s += w * c.s;
                v.d += w * c.d;
                v.t += w * c.t;
            }

    const double nrm = v.norm();
    if (nrm < 1e-9) return out; // fully inside occupied space: no motion
    v.s /= nrm;
    v.d /= nrm;
    v.t /= nrm;
    const double vt = std::max(v.t, kTimeFloor);
    out.s_dot = std::clamp((v.s / vt) * (cfg.cell_s() / cfg.cell_t()),
                           -cfg.max_s_speed, cfg.max_s_speed);
    out.d_dot = std::clamp((v.d / vt) * (cfg.cell_d() / cfg.cell_t()),
                           -cfg.max_d_speed, cfg.max_d_speed);
    return out;
}

void frenet_accels(double s_dot, double d_dot, double s_dot_next,
                   double d_dot_next, double kappa, double dt, double& s_ddot,
                   double& d_ddot, bool centripetal_double) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    const double cent = (centripetal_double ? 2.0 : 1.0) * kappa * s_dot * s_dot;
    s_ddot = (s_dot_next - s_dot) / dt + 2.0 * kappa * s_dot * d_dot;
    d_ddot = (d_dot_next - d_dot) / dt + cent;
}

RateEstimator::RateEstimator(int window, double dt)
    : window_(std::max(3, window)), dt_(dt),
      coeffs_(sg_derivative_weights(std::max(3, window))) {}

void RateEstimator::reset() { hist_.clear(); }

void RateEstimator::push(double value) {
    hist_.push_back(value);
    if (static_cast<int>(hist_.size()) > window_)
        hist_.erase(hist_.begin());
}

double RateEstimator::rate(double next) const {
    const int have = static_cast<int>(hist_.size()) + 1;
    if (have < window_) {
        const double prev = hist_.empty() ? next : hist_.back();
        return (next - prev) / dt_;
    }
    double acc = coeffs_[window_ - 1] * next;
    for (int m = 0; m < window_ - 1; ++m)
        acc += coeffs_[m] * hist_[hist_.size() - (window_ - 1) + m];
    return acc / dt_;
}

std::vector<Candidate> sample_trajectories(
    const VehicleState& initial, const Stvf& stvf,
    const FluidDomainSpec& domain, const ReferencePath& path,
    const VehicleParams& vp, const SamplerConfig& cfg,
    const PerturbationSchedule& schedule) {
    if (schedule.pairs.empty())
        throw std::invalid_argument("empty perturbation schedule");

    const DomainConfig& dom_cfg = domain.config;
    const double half_width = dom_cfg.d_extent / 2.0;
    const auto fp0 = path.project(initial.x, initial.y, half_width);
    if (!fp0)
        throw std::invalid_argument("initial state outside the domain band");

    std::vector<Candidate> out(schedule.pairs.size());

#pragma omp parallel for schedule(dynamic)
    for (int ci = 0; ci < static_cast<int>(schedule.pairs.size()); ++ci) {
        const double gamma = schedule.pairs[ci].first;
        const double eta = schedule.pairs[ci].second;

        Candidate cand;
        cand.trajectory.points.reserve(cfg.steps + 1);
        cand.trajectory.accels.reserve(cfg.steps);
        cand.controls.inputs.reserve(cfg.steps);

        VehicleState state = initial;
        double s_abs = fp0->s;
        double d_rel = fp0->d;
        RateEstimator rate_s(cfg.sg_window, cfg.dt);
        RateEstimator rate_d(cfg.sg_window, cfg.dt);

        {
            TrajectoryPoint p;
            p.state = state;
            p.s = s_abs;
            p.d = d_rel;
            const double beta = path.heading_at(s_abs) - state.psi;
            p.s_dot = state.u * std::cos(beta) + state.v * std::sin(beta);
            p.d_dot = -state.u * std::sin(beta) + state.v * std::cos(beta);
            cand.trajectory.points.push_back(p);
        }

        for (int t = 0; t < cfg.steps; ++t) {
            const double theta = path.heading_at(s_abs);
            const double kappa = path.curvature_at(s_abs);
            const double beta = theta - state.psi;
            const double cb = std::cos(beta);
            const double sb = std::sin(beta);
            const double s_dot = state.u * cb + state.v * sb;
            const double d_dot = -state.u * sb + state.v * cb;
            rate_s.push(s_dot);
            rate_d.push(d_dot);

            const double s_next = s_abs + s_dot * cfg.dt;
            const double d_next = d_rel + d_dot * cfg.dt;

            const FieldSample fs = interpolate_field(
                stvf, dom_cfg, s_next - domain.window_origin_s,
                d_next + half_width, (t + 1) * cfg.dt);
            const double s_dot_tgt = gamma * fs.s_dot;
            const double d_dot_tgt = eta * fs.d_dot;

            const double cent =
                (cfg.centripetal_double ? 2.0 : 1.0) * kappa * s_dot * s_dot;
            const double s_ddot =
                rate_s.rate(s_dot_tgt) + 2.0 * kappa * s_dot * d_dot;
            const double d_ddot = rate_d.rate(d_dot_tgt) + cent;

            // Frenet -> body acceleration (inverse of the velocity map)
            const double u_dot_des = s_ddot * cb - d_ddot * sb;
            const double v_dot_des = s_ddot * sb + d_ddot * cb;

            ControlInput ctrl =
                inverse_dynamics(state, u_dot_des, v_dot_des, vp);
            SaturationFlags flags;
            ctrl = saturate(ctrl, vp, &flags);
            const Accelerations acc =
                forward_dynamics(state, ctrl.fx, ctrl.delta, vp);
            state = integrate(state, acc, cfg.dt);
            s_abs = s_next;
            d_rel = d_next;

            TrajectoryPoint p;
            p.state = state;
            p.s = s_abs;
            p.d = d_rel;
            p.s_dot = s_dot_tgt;
            p.d_dot = d_dot_tgt;
            cand.trajectory.points.push_back(p);
            cand.trajectory.accels.push_back(acc);
            cand.controls.inputs.push_back(ControlStep{ctrl.fx, ctrl.delta, flags});

            const double s_dom = s_abs - domain.window_origin_s;
            if (std::abs(d_rel) > half_width - cfg.lateral_margin ||
                s_dom < 0.0 || s_dom > dom_cfg.s_extent ||
                !std::isfinite(state.x) || !std::isfinite(state.y)) {
                cand.trajectory.feasible = false;
                cand.trajectory.truncated_at = t;
                break;
            }
        }

        out[ci] = std::move(cand);
    }

    return out;
}

} // namespace flowplan
