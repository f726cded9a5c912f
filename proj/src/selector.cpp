#include "flowplan/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowplan {

namespace {

// Longitudinal physical speed encoded by one cell's vector (zero for the
// zero vectors inside occupied space).
double cell_s_speed(const Stvf& stvf, const DomainConfig& cfg, int i, int j,
                    int k) {
    const Vec3& v = stvf.at(i, j, k);
    const double n = v.norm();
    if (n < 1e-12) return 0.0;
    const double vt = std::max(v.t / n, 0.05);
    return (v.s / n / vt) * (cfg.cell_s() / cfg.cell_t());
}

} // namespace

double shear_stress(const Stvf& stvf, const DomainConfig& cfg, double s_dom,
                    double d_dom, double t) {
    auto clamp_idx = [](double g, int n) {
        return std::clamp(static_cast<int>(std::floor(g)), 0, n - 1);
    };
    const int i = clamp_idx(s_dom / cfg.cell_s(), cfg.ns);
    const int j = clamp_idx(d_dom / cfg.cell_d(), cfg.nd);
    const int k = clamp_idx(t / cfg.cell_t(), cfg.nt);

    const int j_lo = std::max(0, j - 1);
    const int j_hi = std::min(cfg.nd - 1, j + 1);
    const double lo = cell_s_speed(stvf, cfg, i, j_lo, k);
    const double hi = cell_s_speed(stvf, cfg, i, j_hi, k);
    const double dd = (j_hi - j_lo) * cfg.cell_d();
    if (dd <= 0.0) return 0.0;
    return std::abs(hi - lo) / dd;
}

CostBreakdown total_cost(const Trajectory& traj, const ControlSequence& ctrl,
                         const Stvf& stvf, const FluidDomainSpec& domain,
                         const CostWeights& w, double dt,
                         const ControlStep* prev) {
    CostBreakdown out;
    if (!traj.feasible) {
        out.feasible = false;
        out.j1 = std::numeric_limits<double>::infinity();
        return out;
    }

    const DomainConfig& cfg = domain.config;
    const double half_width = cfg.d_extent / 2.0;
    const std::size_t n = ctrl.inputs.size();

    for (std::size_t t = 0; t < n; ++t) {
        const TrajectoryPoint& p = traj.points[t];
        const double h =
            shear_stress(stvf, cfg, p.s - domain.window_origin_s,
                         p.d + half_width, static_cast<double>(t) * dt);
        out.j1 += w.c1 * h * h;

        const Accelerations& a = traj.accels[t];
        out.j2 += w.c21 * a.u_dot * a.u_dot + w.c22 * a.v_dot * a.v_dot;

        const ControlStep& c = ctrl.inputs[t];
        out.j3 += w.c31 * c.fx * c.fx + w.c32 * c.delta * c.delta;

        double dfx = 0.0, ddelta = 0.0;
        if (t > 0) {
            dfx = (c.fx - ctrl.inputs[t - 1].fx) / dt;
            ddelta = (c.delta - ctrl.inputs[t - 1].delta) / dt;
        } else if (prev != nullptr) {
            dfx = (c.fx - prev->fx) / dt;
            ddelta = (c.delta - prev->delta) / dt;
        }
        out.j4 += w.c41 * dfx * dfx + w.c42 * ddelta * ddelta;
    }
    return out;
}

int select_best(const std::vector<CostBreakdown>& costs) {
    int best = -1;
    double best_j = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (!costs[i].feasible) continue;
        const double j = costs[i].total();
        if (j < best_j) {
            best_j = j;
            best = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace flowplan
