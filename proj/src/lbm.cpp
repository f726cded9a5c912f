#include "flowplan/lbm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flowplan::lbm {

namespace {

// Maps a physical speed [m/s] onto lattice velocity units: unit boundary
// vectors are scaled by lbm_speed and carry cell_t/cell_s per m/s of
// longitudinal speed.
double speed_to_lattice(double speed, const DomainConfig& cfg,
                        double lbm_speed) {
    return speed * (cfg.cell_t() / cfg.cell_s()) * lbm_speed;
}

} // namespace

CurvatureForcing CurvatureForcing::from_domain(const FluidDomainSpec& domain) {
    const DomainConfig& cfg = domain.config;
    const double rs = cfg.cell_t() / cfg.cell_s();
    const double rd = cfg.cell_t() / cfg.cell_d();
    CurvatureForcing out;
    const int ns = cfg.ns;
    out.coef_s.resize(ns);
    out.coef_d.resize(ns);
    out.active.resize(ns);
    for (int i = 0; i < ns; ++i) {
        const double kappa = domain.curvature[i];
        // Acceleration on lattice velocities, derived from f_s = 2*rho*
        // kappa*s_dot*d_dot and f_d = rho*kappa*s_dot^2 with s_dot =
        // V_s/(rs*V_t), d_dot = V_d/(rd*V_t), and one iteration advancing
        // V_t*cell_t seconds of physical time.
        out.coef_s[i] = 2.0 * kappa * cfg.cell_t() / rd;
        out.coef_d[i] = kappa * rd * cfg.cell_t() / (rs * rs);
        out.active[i] = std::abs(kappa) > 1e-12 ? 1 : 0;
    }
    return out;
}

bool CurvatureForcing::any_active() const {
    return std::any_of(active.begin(), active.end(),
                       [](std::uint8_t a) { return a != 0; });
}

template <class S>
Lattice<S>::Lattice(GridDims dims, std::vector<CellClass> flags,
                    std::vector<Vec3> bc_velocity, double tau)
    : dims_(dims), flags_(std::move(flags)),
      bc_velocity_(std::move(bc_velocity)), tau_(tau) {
    if (tau_ <= 0.5)
        throw std::invalid_argument("relaxation time must exceed 0.5");
    const std::size_t n = dims_.cells();
    if (flags_.size() != n || bc_velocity_.size() != n)
        throw std::invalid_argument("lattice array sizes mismatch");

    // Fluid cells must never pull from outside the grid.
    for (int k = 0; k < dims_.nt; ++k)
        for (int j = 0; j < dims_.nd; ++j)
            for (int i = 0; i < dims_.ns; ++i) {
                const bool face = (i == 0 || i == dims_.ns - 1) ||
                                  (j == 0 || j == dims_.nd - 1) ||
                                  (S::dim == 3 &&
                                   (k == 0 || k == dims_.nt - 1));
                if (face && flags_[dims_.index(i, j, k)] == CellClass::Fluid)
                    throw std::invalid_argument(
                        "fluid cell on a lattice face");
            }

    f_[0].assign(static_cast<std::size_t>(S::Q) * n, 0.0);
    f_[1].assign(static_cast<std::size_t>(S::Q) * n, 0.0);
    rho_.assign(n, 1.0);
    vel_.assign(n, Vec3{});
    wall_mask_.assign(n, 0);

    const std::ptrdiff_t off_d = dims_.ns;
    const std::ptrdiff_t off_t = static_cast<std::ptrdiff_t>(dims_.ns) * dims_.nd;
    for (int k = 0; k < dims_.nt; ++k)
        for (int j = 0; j < dims_.nd; ++j)
            for (int i = 0; i < dims_.ns; ++i) {
                const std::size_t c = dims_.index(i, j, k);
                if (flags_[c] != CellClass::Fluid) continue;
                ++fluid_cells_;
                std::uint32_t m = 0;
                for (int q = 1; q < S::Q; ++q) {
                    const std::ptrdiff_t src =
                        static_cast<std::ptrdiff_t>(c) - S::e[q][0] -
                        S::e[q][1] * off_d - S::e[q][2] * off_t;
                    const CellClass sc = flags_[static_cast<std::size_t>(src)];
                    if (sc == CellClass::Solid || sc == CellClass::PorousSolid)
                        m |= (1u << q);
                }
                wall_mask_[c] = m;
            }
}

template <class S>
void Lattice<S>::initialize(const std::vector<Vec3>& velocity) {
    const std::size_t n = dims_.cells();
    if (velocity.size() != n)
        throw std::invalid_argument("velocity field size mismatch");
    for (std::size_t c = 0; c < n; ++c) {
        Vec3 v{};
        switch (flags_[c]) {
            case CellClass::Fluid: v = velocity[c]; break;
            case CellClass::Boundary: v = bc_velocity_[c]; break;
            default: break; // solids stay at rest
        }
        const auto feq = equilibrium<S>(1.0, v);
        for (int q = 0; q < S::Q; ++q) {
            f_[0][static_cast<std::size_t>(q) * n + c] = feq[q];
            f_[1][static_cast<std::size_t>(q) * n + c] = feq[q];
        }
        rho_[c] = 1.0;
        vel_[c] = v;
    }
    iteration_ = 0;
    stats_ = StepStats{};
}

// One pass over all fluid cells. Fused == true streams from the front
// buffer and collides into the back buffer; Fused == false is the pure
// collision pass operating in place.
template <class S>
template <bool Fused>
void Lattice<S>::pass() {
    const std::size_t n = dims_.cells();
    const int ns = dims_.ns;
    const int nd = dims_.nd;
    const int nt = dims_.nt;
    const double* fr = f_[front_].data();
    double* bk = Fused ? f_[1 - front_].data() : f_[front_].data();
    const double inv_tau = 1.0 / tau_;
    const int rows = nt * nd;

    std::ptrdiff_t off[S::Q];
    for (int q = 0; q < S::Q; ++q)
        off[q] = S::e[q][0] + static_cast<std::ptrdiff_t>(S::e[q][1]) * ns +
                 static_cast<std::ptrdiff_t>(S::e[q][2]) * ns * nd;

    std::vector<double> row_delta(rows, 0.0);
    std::vector<double> row_max2(rows, 0.0);
    std::vector<long> row_clamp(rows, 0);

#pragma omp parallel for schedule(static)
    for (int row = 0; row < rows; ++row) {
        const std::size_t base = static_cast<std::size_t>(row) * ns;
        double dsum = 0.0;
        double vmax2 = 0.0;
        long clamps = 0;

        const double* rs[S::Q];
        double* wr[S::Q];
        for (int q = 0; q < S::Q; ++q) {
            rs[q] = fr + static_cast<std::size_t>(q) * n + base - off[q];
            wr[q] = bk + static_cast<std::size_t>(q) * n + base;
        }

        for (int i = 0; i < ns; ++i) {
            const std::size_t c = base + i;
            if (flags_[c] != CellClass::Fluid) continue;

            double fi[S::Q];
            if constexpr (Fused) {
                const std::uint32_t m = wall_mask_[c];
                if (m == 0) {
                    for (int q = 0; q < S::Q; ++q) fi[q] = rs[q][i];
                } else {
                    for (int q = 0; q < S::Q; ++q)
                        fi[q] = ((m >> q) & 1u)
                                    ? fr[static_cast<std::size_t>(S::opp[q]) * n + c]
                                    : rs[q][i];
                }
            } else {
                for (int q = 0; q < S::Q; ++q)
                    fi[q] = fr[static_cast<std::size_t>(q) * n + c];
            }

            double rho = 0.0;
            Vec3 mom{};
            for (int q = 0; q < S::Q; ++q) {
                rho += fi[q];
                mom.s += fi[q] * S::e[q][0];
                mom.d += fi[q] * S::e[q][1];
                mom.t += fi[q] * S::e[q][2];
            }

            // Equilibrium evaluated at momentum/density keeps mass and
            // momentum exactly conserved by the relaxation.
            Vec3 u{mom.s / rho, mom.d / rho, mom.t / rho};
            if (forcing_ != nullptr && forcing_->active[i]) {
                u.s += tau_ * forcing_->coef_s[i] * u.s * u.d;
                u.d += tau_ * forcing_->coef_d[i] * u.s * u.s;
            }

            const double uu = u.s * u.s + u.d * u.d + u.t * u.t;
            double rho_new = 0.0;
            Vec3 mom_new{};
            for (int q = 0; q < S::Q; ++q) {
                const double eu = S::e[q][0] * u.s + S::e[q][1] * u.d +
                                  S::e[q][2] * u.t;
                const double feq =
                    S::w[q] * rho *
                    (1.0 + 3.0 * eu + 4.5 * eu * eu - 1.5 * uu);
                double fn = fi[q] + (feq - fi[q]) * inv_tau;
                if (fn < 0.0) {
                    fn = 0.0;
                    ++clamps;
                }
                wr[q][i] = fn;
                rho_new += fn;
                mom_new.s += fn * S::e[q][0];
                mom_new.d += fn * S::e[q][1];
                mom_new.t += fn * S::e[q][2];
            }

            const Vec3 old = vel_[c];
            const double dvs = mom_new.s - old.s;
            const double dvd = mom_new.d - old.d;
            const double dvt = mom_new.t - old.t;
            dsum += std::sqrt(dvs * dvs + dvd * dvd + dvt * dvt);
            const double v2 = mom_new.s * mom_new.s + mom_new.d * mom_new.d +
                              mom_new.t * mom_new.t;
            vmax2 = std::max(vmax2, v2);
            rho_[c] = rho_new;
            vel_[c] = mom_new;
        }
        row_delta[row] = dsum;
        row_max2[row] = vmax2;
        row_clamp[row] = clamps;
    }

    StepStats st;
    for (int row = 0; row < rows; ++row) {
        st.velocity_delta_sum += row_delta[row];
        st.max_speed = std::max(st.max_speed, row_max2[row]);
        st.clamped += row_clamp[row];
    }
    st.max_speed = std::sqrt(st.max_speed);
    stats_ = st;

    if constexpr (Fused) {
        front_ = 1 - front_;
        ++iteration_;
    }
}

template <class S>
void Lattice<S>::step() {
    pass<true>();
}

template <class S>
void Lattice<S>::stream() {
    const std::size_t n = dims_.cells();
    const int ns = dims_.ns;
    const double* fr = f_[front_].data();
    double* bk = f_[1 - front_].data();
    const int rows = dims_.nt * dims_.nd;

    std::ptrdiff_t off[S::Q];
    for (int q = 0; q < S::Q; ++q)
        off[q] = S::e[q][0] + static_cast<std::ptrdiff_t>(S::e[q][1]) * ns +
                 static_cast<std::ptrdiff_t>(S::e[q][2]) * ns * dims_.nd;

#pragma omp parallel for schedule(static)
    for (int row = 0; row < rows; ++row) {
        const std::size_t base = static_cast<std::size_t>(row) * ns;
        for (int i = 0; i < ns; ++i) {
            const std::size_t c = base + i;
            if (flags_[c] != CellClass::Fluid) continue;
            const std::uint32_t m = wall_mask_[c];
            for (int q = 0; q < S::Q; ++q) {
                const double v =
                    ((m >> q) & 1u)
                        ? fr[static_cast<std::size_t>(S::opp[q]) * n + c]
                        : fr[static_cast<std::size_t>(q) * n + c - off[q]];
                bk[static_cast<std::size_t>(q) * n + c] = v;
            }
        }
    }
    front_ = 1 - front_;
    ++iteration_;
}

template <class S>
void Lattice<S>::collide() {
    pass<false>();
}

template <class S>
double Lattice<S>::mass() const {
    const std::size_t n = dims_.cells();
    const double* fr = f_[front_].data();
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        if (flags_[c] != CellClass::Fluid) continue;
        double s = 0.0;
        for (int q = 0; q < S::Q; ++q)
            s += fr[static_cast<std::size_t>(q) * n + c];
        total += s;
    }
    return total;
}

template <class S>
double Lattice<S>::density(int i, int j, int k) const {
    return rho_[dims_.index(i, j, k)];
}

template <class S>
Vec3 Lattice<S>::velocity(int i, int j, int k) const {
    return vel_[dims_.index(i, j, k)];
}

template <class S>
std::array<double, S::Q> Lattice<S>::cell_densities(int i, int j,
                                                    int k) const {
    const std::size_t n = dims_.cells();
    const std::size_t c = dims_.index(i, j, k);
    std::array<double, S::Q> out;
    for (int q = 0; q < S::Q; ++q)
        out[q] = f_[front_][static_cast<std::size_t>(q) * n + c];
    return out;
}

template <class S>
void Lattice<S>::set_cell_densities(int i, int j, int k,
                                    const std::array<double, S::Q>& f) {
    const std::size_t n = dims_.cells();
    const std::size_t c = dims_.index(i, j, k);
    for (int q = 0; q < S::Q; ++q)
        f_[front_][static_cast<std::size_t>(q) * n + c] = f[q];
    double rho;
    Vec3 mom;
    macroscopics<S>(f.data(), rho, mom);
    rho_[c] = rho;
    vel_[c] = mom;
}

template class Lattice<D2Q9>;
template class Lattice<D3Q19>;

Lattice<D3Q19> make_lattice(const FluidDomainSpec& domain,
                            const SolveParams& params) {
    const GridDims dims = domain.config.dims();
    const std::size_t n = dims.cells();
    std::vector<Vec3> bc(n);
    for (std::size_t c = 0; c < n; ++c) {
        bc[c] = Vec3{domain.boundary_velocity[c].s * params.lbm_speed,
                     domain.boundary_velocity[c].d * params.lbm_speed,
                     domain.boundary_velocity[c].t * params.lbm_speed};
    }
    return Lattice<D3Q19>(dims, domain.cell_class, std::move(bc), params.tau);
}

std::vector<Vec3> interpolated_init(const FluidDomainSpec& domain,
                                    const SolveParams& params) {
    const GridDims dims = domain.config.dims();
    std::vector<Vec3> v(dims.cells());
    const int nt = dims.nt;
    for (int j = 0; j < dims.nd; ++j)
        for (int i = 0; i < dims.ns; ++i) {
            Vec3 bot{}, top{};
            if (domain.cls(i, j, 0) == CellClass::Boundary)
                bot = domain.boundary_velocity[domain.index(i, j, 0)];
            if (domain.cls(i, j, nt - 1) == CellClass::Boundary)
                top = domain.boundary_velocity[domain.index(i, j, nt - 1)];
            for (int k = 0; k < nt; ++k) {
                const double w = nt > 1 ? static_cast<double>(k) / (nt - 1) : 0.0;
                v[dims.index(i, j, k)] =
                    Vec3{((1.0 - w) * bot.s + w * top.s) * params.lbm_speed,
                         ((1.0 - w) * bot.d + w * top.d) * params.lbm_speed,
                         ((1.0 - w) * bot.t + w * top.t) * params.lbm_speed};
            }
        }
    return v;
}

Stvf extract_stvf(const Lattice<D3Q19>& lattice) {
    const GridDims dims = lattice.dims();
    Stvf out;
    out.dims = dims;
    out.vectors.assign(dims.cells(), Vec3{});
    const auto& vel = lattice.velocity_field();
    for (int k = 0; k < dims.nt; ++k)
        for (int j = 0; j < dims.nd; ++j)
            for (int i = 0; i < dims.ns; ++i) {
                const std::size_t c = dims.index(i, j, k);
                const CellClass cls = lattice.cell_class(i, j, k);
                if (cls == CellClass::Solid || cls == CellClass::PorousSolid)
                    continue; // zero vector
                Vec3 v = vel[c];
                if (v.t < 0.0) v.t = 0.0;
                const double nrm = v.norm();
                if (nrm < 1e-12) {
                    out.vectors[c] = Vec3{0.0, 0.0, 1.0}; // stagnation
                } else {
                    out.vectors[c] = Vec3{v.s / nrm, v.d / nrm, v.t / nrm};
                }
            }
    return out;
}

SolveResult solve(const FluidDomainSpec& domain, const SolveParams& params,
                  const std::vector<Vec3>* init_velocity) {
    Lattice<D3Q19> lattice = make_lattice(domain, params);
    CurvatureForcing forcing;
    if (params.apply_curvature_force) {
        forcing = CurvatureForcing::from_domain(domain);
        if (forcing.any_active()) lattice.set_forcing(&forcing);
    }

    if (init_velocity != nullptr)
        lattice.initialize(*init_velocity);
    else
        lattice.initialize(interpolated_init(domain, params));

    // A physical speed w maps to w * (cell_t/cell_s) * lbm_speed lattice
    // units; the same slope converts the convergence threshold.
    const double tol_lat =
        speed_to_lattice(params.tol_speed, domain.config, params.lbm_speed);
    const std::size_t fluid = std::max<std::size_t>(1, lattice.fluid_cells());

    SolveResult res;
    const auto start = std::chrono::steady_clock::now();
    for (int it = 0; it < params.max_iters; ++it) {
        lattice.step();
        res.iterations = it + 1;
        const StepStats& st = lattice.last_stats();
        res.clamped += st.clamped;
        res.max_speed = st.max_speed;
        if (params.observer && params.observe_every > 0 &&
            (it + 1) % params.observe_every == 0)
            params.observer(it + 1, lattice);
        if (st.max_speed > params.divergence_limit) {
            res.diverged = true;
            break;
        }
        const double mean_delta = st.velocity_delta_sum / fluid;
        res.residual = mean_delta /
                       speed_to_lattice(1.0, domain.config, params.lbm_speed);
        if (mean_delta < tol_lat) {
            res.converged = true;
            break;
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration<double>(stop - start).count();
    if (secs > 0.0)
        res.mlups = static_cast<double>(fluid) * res.iterations / secs / 1e6;

    res.stvf = extract_stvf(lattice);
    res.velocity = lattice.velocity_field();
    return res;
}

} // namespace flowplan::lbm
