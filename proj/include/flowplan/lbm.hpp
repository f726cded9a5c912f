#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "flowplan/domain.hpp"
#include "flowplan/field.hpp"

namespace flowplan::lbm {

/// Discrete velocity sets. Components are ordered (s, d, t); D2Q9 keeps
/// its third component zero so both stencils share one grid layout.
struct D2Q9 {
    static constexpr int Q = 9;
    static constexpr int dim = 2;
    static constexpr int e[9][3] = {
        {0, 0, 0},  {1, 0, 0},  {0, 1, 0},  {-1, 0, 0}, {0, -1, 0},
        {1, 1, 0},  {-1, 1, 0}, {-1, -1, 0}, {1, -1, 0}};
    static constexpr double w[9] = {
        4.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};
    static constexpr int opp[9] = {0, 3, 4, 1, 2, 7, 8, 5, 6};
};

struct D3Q19 {
    static constexpr int Q = 19;
    static constexpr int dim = 3;
    static constexpr int e[19][3] = {
        {0, 0, 0},
        {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},  {0, -1, 0}, {0, 0, 1},  {0, 0, -1},
        {1, 1, 0},  {-1, -1, 0}, {1, -1, 0}, {-1, 1, 0},
        {1, 0, 1},  {-1, 0, -1}, {1, 0, -1}, {-1, 0, 1},
        {0, 1, 1},  {0, -1, -1}, {0, 1, -1}, {0, -1, 1}};
    static constexpr double w[19] = {
        1.0 / 3.0,
        1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
        1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};
    static constexpr int opp[19] = {0, 2,  1,  4,  3,  6,  5,  8,  7, 10,
                                    9, 12, 11, 14, 13, 16, 15, 18, 17};
};

/// Equilibrium distribution at density rho and velocity u (Q values).
template <class S>
std::array<double, S::Q> equilibrium(double rho, const Vec3& u) {
    std::array<double, S::Q> f;
    const double uu = u.s * u.s + u.d * u.d + u.t * u.t;
    for (int q = 0; q < S::Q; ++q) {
        const double eu =
            S::e[q][0] * u.s + S::e[q][1] * u.d + S::e[q][2] * u.t;
        f[q] = S::w[q] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - 1.5 * uu);
    }
    return f;
}

/// Density and momentum sums of one cell's Q densities.
template <class S>
void macroscopics(const double* f, double& rho, Vec3& mom) {
    rho = 0.0;
    mom = Vec3{};
    for (int q = 0; q < S::Q; ++q) {
        rho += f[q];
        mom.s += f[q] * S::e[q][0];
        mom.d += f[q] * S::e[q][1];
        mom.t += f[q] * S::e[q][2];
    }
}

/// Per-s-column coefficients of the curvature body force evaluated on
/// lattice velocities: shift_s = coef_s * V_s * V_d, shift_d = coef_d *
/// V_s^2. Zero columns are skipped entirely.
struct CurvatureForcing {
    std::vector<double> coef_s;
    std::vector<double> coef_d;
    std::vector<std::uint8_t> active;

    static CurvatureForcing from_domain(const FluidDomainSpec& domain);
    bool any_active() const;
};

struct StepStats {
    double velocity_delta_sum = 0.0; // sum over fluid cells of |V_new - V_old|
    double max_speed = 0.0;          // max |V| over fluid cells
    long clamped = 0;                // negative densities clamped to zero
};

/// Double-buffered lattice with halfway bounce-back at solid/porous cells
/// and fixed equilibrium distributions at prescribed-velocity cells.
/// Updates are per-cell writes only, so results do not depend on the
/// number of worker threads.
template <class S>
class Lattice {
  public:
    /// `bc_velocity` carries lattice-unit velocities for Boundary cells.
    /// Every cell on a face of the grid (along the stencil's axes) must be
    /// non-fluid so that pulls never leave the grid.
    Lattice(GridDims dims, std::vector<CellClass> flags,
            std::vector<Vec3> bc_velocity, double tau);

    /// rho = 1 everywhere, velocities as given (lattice units, fluid cells
    /// only; boundary cells use their prescribed values), f = equilibrium.
    void initialize(const std::vector<Vec3>& velocity);

    /// Fused streaming + collision into the back buffer, then swap.
    void step();
    /// Pure transport pass (exchange with neighbors, bounce-back at walls).
    void stream();
    /// Pure relaxation pass on the current buffer; refreshes macroscopics.
    void collide();

    void set_forcing(const CurvatureForcing* forcing) { forcing_ = forcing; }

    const StepStats& last_stats() const { return stats_; }
    int iteration() const { return iteration_; }
    GridDims dims() const { return dims_; }
    double tau() const { return tau_; }
    std::size_t fluid_cells() const { return fluid_cells_; }

    /// Total mass over fluid cells.
    double mass() const;
    double density(int i, int j, int k) const;
    Vec3 velocity(int i, int j, int k) const;
    const std::vector<double>& density_field() const { return rho_; }
    const std::vector<Vec3>& velocity_field() const { return vel_; }
    CellClass cell_class(int i, int j, int k) const {
        return flags_[dims_.index(i, j, k)];
    }

    std::array<double, S::Q> cell_densities(int i, int j, int k) const;
    void set_cell_densities(int i, int j, int k,
                            const std::array<double, S::Q>& f);

  private:
    template <bool Fused>
    void pass();

    GridDims dims_;
    std::vector<CellClass> flags_;
    std::vector<Vec3> bc_velocity_;
    double tau_;
    std::vector<double> f_[2]; // [buf][q * cells + cell]
    int front_ = 0;
    std::vector<double> rho_;
    std::vector<Vec3> vel_; // momentum sums (Eq.-style macroscopic velocity)
    std::vector<std::uint32_t> wall_mask_;
    const CurvatureForcing* forcing_ = nullptr;
    StepStats stats_;
    int iteration_ = 0;
    std::size_t fluid_cells_ = 0;
};

struct SolveParams {
    int max_iters = 100;
    double tol_speed = 0.01;   // convergence threshold [m/s equivalent]
    double lbm_speed = 0.1;    // lattice speed assigned to unit BC vectors
    double tau = 0.6;          // BGK relaxation time [lattice units]
    double divergence_limit = 0.3; // abort when any |V| exceeds this
    bool apply_curvature_force = true;
    // optional per-iteration observer (field dumps)
    std::function<void(int, const Lattice<D3Q19>&)> observer;
    int observe_every = 0;

    double kinematic_viscosity() const { return (tau - 0.5) / 3.0; }
};

struct SolveResult {
    Stvf stvf;
    std::vector<Vec3> velocity; // raw lattice velocities (warm starts, dumps)
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    double residual = 0.0; // mean |dV| per fluid cell [m/s equivalent]
    double mlups = 0.0;    // million fluid-cell updates per second
    long clamped = 0;
    double max_speed = 0.0; // max |V| in lattice units at the last step
};

/// Assembles the D3Q19 lattice for a domain spec (boundary unit vectors
/// scaled by lbm_speed) and initializes it by interpolating the bottom-
/// and top-face conditions along t.
Lattice<D3Q19> make_lattice(const FluidDomainSpec& domain,
                            const SolveParams& params);

/// Default initialization field: linear blend of the bottom- and top-face
/// boundary vectors along t, in lattice units.
std::vector<Vec3> interpolated_init(const FluidDomainSpec& domain,
                                    const SolveParams& params);

/// Iterates stream+collision until the mean velocity change drops below
/// tol or max_iters is reached, then normalizes the field into an Stvf.
/// `init_velocity` (lattice units, full grid) overrides the default
/// interpolated initialization, e.g. for warm starts.
SolveResult solve(const FluidDomainSpec& domain, const SolveParams& params = {},
                  const std::vector<Vec3>* init_velocity = nullptr);

/// Unit-normalizes a converged lattice's velocity field: zero inside
/// solids, time component clamped nonnegative, stagnation maps to pure
/// time advance (0,0,1).
Stvf extract_stvf(const Lattice<D3Q19>& lattice);

} // namespace flowplan::lbm
