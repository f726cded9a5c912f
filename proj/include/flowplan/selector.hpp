#pragma once

#include <vector>

#include "flowplan/domain.hpp"
#include "flowplan/field.hpp"
#include "flowplan/sampler.hpp"

namespace flowplan {

struct CostWeights {
    double c1 = 10.0;     // shear-stress safety
    double c21 = 1.0;     // longitudinal acceleration
    double c22 = 4.0;     // lateral acceleration
    double c31 = 1e-7;    // force effort
    double c32 = 10.0;    // steering effort
    double c41 = 1e-7;    // force rate
    double c42 = 10.0;    // steering rate
};

struct CostBreakdown {
    double j1 = 0.0;
    double j2 = 0.0;
    double j3 = 0.0;
    double j4 = 0.0;
    bool feasible = true;

    double total() const { return j1 + j2 + j3 + j4; }
};

/// Shear-stress proxy at a domain point: magnitude of the lateral
/// gradient of the field's longitudinal speed, by central differences
/// over the neighboring cells (one-sided at the lateral edges). Vanishes
/// in uniform flow and peaks in the boundary layers around occupied
/// space.
double shear_stress(const Stvf& stvf, const DomainConfig& cfg, double s_dom,
                    double d_dom, double t);

/// Cumulative cost of one candidate. `prev` supplies the control applied
/// in the previous planning step so the first rate term is continuous;
/// pass nullptr to zero the first difference. Infeasible trajectories
/// cost infinity.
CostBreakdown total_cost(const Trajectory& traj, const ControlSequence& ctrl,
                         const Stvf& stvf, const FluidDomainSpec& domain,
                         const CostWeights& w, double dt,
                         const ControlStep* prev = nullptr);

/// Index of the minimum-cost candidate; ties pick the lower index so the
/// unperturbed streamline wins. Returns -1 when every candidate is
/// infeasible.
int select_best(const std::vector<CostBreakdown>& costs);

} // namespace flowplan
