#include "flowplan/domain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace flowplan {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the packed identifiers
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) +
                      0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct OrientedRect {
    double cs, cd;   // center in (s, d) metric coordinates
    double axs, axd; // unit axis along the footprint length
    double half_len, half_wid;

    bool contains(double s, double d) const {
        const double rs = s - cs;
        const double rd = d - cd;
        const double along = rs * axs + rd * axd;
        const double across = -rs * axd + rd * axs;
        return std::abs(along) <= half_len && std::abs(across) <= half_wid;
    }
};

} // namespace

Vec3 boundary_vector_from_speed(double s_dot, double d_dot,
                                const DomainConfig& cfg) {
    const double sd = std::clamp(s_dot, -cfg.max_s_speed, cfg.max_s_speed);
    const double dd = std::clamp(d_dot, -cfg.max_d_speed, cfg.max_d_speed);
    Vec3 v;
    v.s = sd * cfg.cell_t() / cfg.cell_s();
    v.d = dd * cfg.cell_t() / cfg.cell_d();
    v.t = 1.0;
    const double n = v.norm();
    v.s /= n;
    v.d /= n;
    v.t /= n;
    return v;
}

FluidDomainSpec build_domain(const ReferencePath& path,
                             const VehicleState& ev,
                             const std::vector<ObstaclePrediction>& predictions,
                             const std::vector<double>& lane_markings,
                             const DomainConfig& cfg) {
    const GridDims dims = cfg.dims();
    const double ds = cfg.cell_s();
    const double dd = cfg.cell_d();
    const double dt = cfg.cell_t();
    const double half_width = cfg.d_extent / 2.0;

    const auto ev_fp = path.project(ev.x, ev.y, half_width);
    if (!ev_fp) throw std::invalid_argument("ego outside the domain band");
    for (const auto& pred : predictions) {
        if (!pred.samples.empty() &&
            pred.samples.back().t < cfg.horizon - 1e-9)
            throw std::invalid_argument("prediction horizon shorter than t_p");
    }

    FluidDomainSpec spec;
    spec.config = cfg;
    spec.window_origin_s = ev_fp->s - cfg.s_behind;
    spec.cell_class.assign(dims.cells(), CellClass::Fluid);
    spec.boundary_velocity.assign(dims.cells(), Vec3{});
    spec.curvature.resize(cfg.ns);
    for (int i = 0; i < cfg.ns; ++i) {
        const double s_abs = spec.window_origin_s + (i + 0.5) * ds;
        spec.curvature[i] =
            path.curvature_at(std::clamp(s_abs, 0.0, path.total_length()));
    }

    auto set_class = [&](int i, int j, int k, CellClass c) {
        spec.cell_class[dims.index(i, j, k)] = c;
    };
    auto get_class = [&](int i, int j, int k) {
        return spec.cell_class[dims.index(i, j, k)];
    };

    // Road-boundary walls at the lateral faces.
    for (int k = 0; k < cfg.nt; ++k)
        for (int i = 0; i < cfg.ns; ++i) {
            set_class(i, 0, k, CellClass::Solid);
            set_class(i, cfg.nd - 1, k, CellClass::Solid);
        }

    // Nominal-speed conditions: top face and both s faces.
    const Vec3 nominal = boundary_vector_from_speed(cfg.nominal_speed, 0.0, cfg);
    auto impose = [&](int i, int j, int k, const Vec3& v) {
        if (get_class(i, j, k) == CellClass::Solid) return;
        set_class(i, j, k, CellClass::Boundary);
        spec.boundary_velocity[dims.index(i, j, k)] = v;
    };
    for (int j = 1; j < cfg.nd - 1; ++j) {
        for (int i = 0; i < cfg.ns; ++i) impose(i, j, cfg.nt - 1, nominal);
        for (int k = 0; k < cfg.nt; ++k) {
            impose(0, j, k, nominal);
            impose(cfg.ns - 1, j, k, nominal);
        }
    }

    // Current ego velocity on the whole bottom face (t = 0); wins over the
    // s-face condition along the shared edges.
    const double beta = path.heading_at(ev_fp->s) - ev.psi;
    const double ev_s_dot = ev.u * std::cos(beta) + ev.v * std::sin(beta);
    const double ev_d_dot = -ev.u * std::sin(beta) + ev.v * std::cos(beta);
    const Vec3 ev_vec = boundary_vector_from_speed(ev_s_dot, ev_d_dot, cfg);
    for (int j = 1; j < cfg.nd - 1; ++j)
        for (int i = 0; i < cfg.ns; ++i) impose(i, j, 0, ev_vec);

    // Occupied space: predicted obstacle footprints (inflated, oriented by
    // the predicted motion direction) become solid columns through their
    // time slices. Occupancy overrides face conditions.
    const double half_len = cfg.obstacle_length / 2.0 + cfg.obstacle_margin;
    const double half_wid = cfg.obstacle_width / 2.0 + cfg.obstacle_margin;
    const double bound = std::sqrt(half_len * half_len + half_wid * half_wid);
    for (const auto& pred : predictions) {
        const auto& ss = pred.samples;
        if (ss.size() < 2) continue;
        const double cadence = ss[1].t - ss[0].t;
        for (int k = 0; k < cfg.nt; ++k) {
            const double tc = (k + 0.5) * dt;
            const double fi = tc / cadence;
            const std::size_t a = std::min<std::size_t>(
                static_cast<std::size_t>(fi), ss.size() - 2);
            const double w = std::clamp(fi - static_cast<double>(a), 0.0, 1.0);
            if (!ss[a].valid || !ss[a + 1].valid) continue;

            OrientedRect rect;
            rect.cs = (1.0 - w) * ss[a].s + w * ss[a + 1].s;
            rect.cd = (1.0 - w) * ss[a].d + w * ss[a + 1].d;
            double mx = ss[a + 1].s - ss[a].s;
            double my = ss[a + 1].d - ss[a].d;
            const double mn = std::sqrt(mx * mx + my * my);
            if (mn > 1e-6) {
                rect.axs = mx / mn;
                rect.axd = my / mn;
            } else {
                rect.axs = 1.0; // stationary: align with the route
                rect.axd = 0.0;
            }
            rect.half_len = half_len;
            rect.half_wid = half_wid;

            const double s_rel = rect.cs - spec.window_origin_s;
            const int i_lo = std::max(0, (int)std::floor((s_rel - bound) / ds));
            const int i_hi =
                std::min(cfg.ns - 1, (int)std::ceil((s_rel + bound) / ds));
            const int j_lo = std::max(
                0, (int)std::floor((rect.cd + half_width - bound) / dd));
            const int j_hi = std::min(
                cfg.nd - 1, (int)std::ceil((rect.cd + half_width + bound) / dd));
            for (int j = j_lo; j <= j_hi; ++j) {
                const double cell_d_rel = (j + 0.5) * dd - half_width;
                for (int i = i_lo; i <= i_hi; ++i) {
                    const double cell_s_abs =
                        spec.window_origin_s + (i + 0.5) * ds;
                    if (rect.contains(cell_s_abs, cell_d_rel)) {
                        set_class(i, j, k, CellClass::Solid);
                        spec.boundary_velocity[dims.index(i, j, k)] = Vec3{};
                    }
                }
            }
        }
    }

    // Lane markings: porous sheets. Per s column, block exactly
    // floor(R_p * n) of the still-fluid cells, stratified over t, with a
    // deterministic per-column generator.
    for (std::size_t m = 0; m < lane_markings.size(); ++m) {
        const double d_dom = lane_markings[m] + half_width;
        const int j = std::clamp(static_cast<int>(std::floor(d_dom / dd)), 0,
                                 cfg.nd - 1);
        for (int i = 0; i < cfg.ns; ++i) {
            std::vector<int> fluid_k;
            fluid_k.reserve(cfg.nt);
            for (int k = 0; k < cfg.nt; ++k)
                if (get_class(i, j, k) == CellClass::Fluid) fluid_k.push_back(k);
            const int n = static_cast<int>(fluid_k.size());
            const int blocked =
                static_cast<int>(std::floor(cfg.porous_resistance * n));
            if (blocked <= 0) continue;
            std::mt19937_64 rng(mix_seed(cfg.seed, m, static_cast<std::uint64_t>(i)));
            for (int b = 0; b < blocked; ++b) {
                const int lo = (b * n) / blocked;
                const int hi = ((b + 1) * n) / blocked; // exclusive
                std::uniform_int_distribution<int> pick(lo, hi - 1);
                set_class(i, j, fluid_k[pick(rng)], CellClass::PorousSolid);
            }
        }
    }

    return spec;
}

} // namespace flowplan
