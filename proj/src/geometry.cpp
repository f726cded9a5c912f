#include "flowplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowplan {

namespace {

double hypot2(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

// Unwraps b relative to a so |b - a| <= pi.
double unwrap_to(double a, double b) {
    double d = b - a;
    while (d > 3.14159265358979323846) d -= 2.0 * 3.14159265358979323846;
    while (d < -3.14159265358979323846) d += 2.0 * 3.14159265358979323846;
    return a + d;
}

} // namespace

ReferencePath::ReferencePath(std::vector<PathSample> samples,
                             double max_curvature)
    : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw PathError("reference path needs >= 2 samples");
    step_ = samples_[1].s - samples_[0].s;
    for (const auto& p : samples_) {
        if (!std::isfinite(p.curvature) || std::abs(p.curvature) > max_curvature)
            throw PathError("reference path curvature exceeds limit");
    }
}

PathSample ReferencePath::sample_at(double s) const {
    const double L = total_length();
    const double sc = std::clamp(s, 0.0, L);
    const std::size_t n = samples_.size();
    std::size_t i = static_cast<std::size_t>(sc / step_);
    if (i >= n - 1) i = n - 2;
    const PathSample& a = samples_[i];
    const PathSample& b = samples_[i + 1];
    const double seg = b.s - a.s;
    const double t = seg > 0.0 ? (sc - a.s) / seg : 0.0;

    PathSample out;
    out.s = sc;
    out.x = a.x + t * (b.x - a.x);
    out.y = a.y + t * (b.y - a.y);
    const double hb = unwrap_to(a.heading, b.heading);
    out.heading = a.heading + t * (hb - a.heading);
    out.curvature = a.curvature + t * (b.curvature - a.curvature);

    if (s < 0.0 || s > L) {
        // extrapolate position along the end tangent; heading/curvature clamp
        const PathSample& e = (s < 0.0) ? samples_.front() : samples_.back();
        const double ds = s - e.s;
        out.x = e.x + ds * std::cos(e.heading);
        out.y = e.y + ds * std::sin(e.heading);
        out.heading = e.heading;
        out.curvature = e.curvature;
        out.s = s;
    }
    return out;
}

void ReferencePath::to_cartesian(const FrenetPose& fp, double& x, double& y,
                                 double& heading) const {
    if (fp.s < -1e-9 || fp.s > total_length() + 1e-9)
        throw PathError("frenet s outside path range");

    // Offset along the left normal of the interpolated heading; project()
    // inverts this frame exactly.
    const PathSample base = sample_at(std::clamp(fp.s, 0.0, total_length()));
    x = base.x - fp.d * std::sin(base.heading);
    y = base.y + fp.d * std::cos(base.heading);
    heading = base.heading;
}

std::optional<FrenetPose> ReferencePath::project(double x, double y,
                                                 double d_max) const {
    const std::size_t n = samples_.size();
    double best_dist2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    double best_d = 0.0;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const PathSample& a = samples_[i];
        const PathSample& b = samples_[i + 1];
        const double seg = b.s - a.s;
        const double tx = (b.x - a.x) / seg;
        const double ty = (b.y - a.y) / seg;
        const double rx = x - a.x;
        const double ry = y - a.y;
        const double u = std::clamp(rx * tx + ry * ty, 0.0, seg);
        const double px = a.x + u * tx;
        const double py = a.y + u * ty;
        const double dx = x - px;
        const double dy = y - py;
        const double dist2 = dx * dx + dy * dy;
        // strict improvement keeps the smaller s on ties
        if (dist2 < best_dist2 - 1e-15) {
            best_dist2 = dist2;
            best_s = a.s + u;
            best_d = dx * -ty + dy * tx; // signed: positive left of tangent
        }
    }

    const double dist = std::sqrt(best_dist2);
    if (dist > d_max) return std::nullopt;

    // Reject projections that fall beyond the path ends (clamped onto the
    // first/last sample but pointing outward).
    const double eps = 1e-9;
    if (best_s <= eps) {
        const PathSample& a = samples_.front();
        const double tx = (samples_[1].x - a.x);
        const double ty = (samples_[1].y - a.y);
        if ((x - a.x) * tx + (y - a.y) * ty < -1e-9) return std::nullopt;
    }
    if (best_s >= total_length() - eps) {
        const PathSample& b = samples_.back();
        const PathSample& a = samples_[n - 2];
        const double tx = (b.x - a.x);
        const double ty = (b.y - a.y);
        if ((x - b.x) * tx + (y - b.y) * ty > 1e-9) return std::nullopt;
    }

    FrenetPose fp;
    fp.s = best_s;
    fp.d = best_d;
    return fp;
}

ReferencePath build_reference_path(const std::vector<Vec2>& waypoints,
                                   double resample_step,
                                   double max_curvature) {
    if (waypoints.size() < 2)
        throw PathError("need at least two waypoints");
    if (resample_step <= 0.0)
        throw PathError("resample step must be positive");

    std::vector<double> cum(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double d = hypot2(waypoints[i].x - waypoints[i - 1].x,
                                waypoints[i].y - waypoints[i - 1].y);
        if (d < 1e-9)
            throw PathError("duplicate consecutive waypoints");
        cum[i] = cum[i - 1] + d;
    }
    const double L = cum.back();

    // Uniform spacing: adjust the step so samples land exactly on both ends.
    const std::size_t nseg =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::round(L / resample_step)));
    const double step = L / static_cast<double>(nseg);

    std::vector<PathSample> samples(nseg + 1);
    std::size_t j = 0;
    for (std::size_t i = 0; i <= nseg; ++i) {
        const double s = std::min(L, static_cast<double>(i) * step);
        while (j + 1 < cum.size() && cum[j + 1] < s) ++j;
        const double seg = cum[j + 1] - cum[j];
        const double t = seg > 0.0 ? (s - cum[j]) / seg : 0.0;
        samples[i].s = static_cast<double>(i) * step;
        samples[i].x = waypoints[j].x + t * (waypoints[j + 1].x - waypoints[j].x);
        samples[i].y = waypoints[j].y + t * (waypoints[j + 1].y - waypoints[j].y);
    }
    samples[nseg].s = L;

    // Heading by centered differences of positions, unwrapped; one-sided at ends.
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t i0 = (i == 0) ? 0 : i - 1;
        const std::size_t i1 = (i == n - 1) ? n - 1 : i + 1;
        samples[i].heading = std::atan2(samples[i1].y - samples[i0].y,
                                        samples[i1].x - samples[i0].x);
    }
    for (std::size_t i = 1; i < n; ++i)
        samples[i].heading = unwrap_to(samples[i - 1].heading, samples[i].heading);

    // Curvature = d(heading)/ds, centered; one-sided at ends.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t i0 = (i == 0) ? 0 : i - 1;
        const std::size_t i1 = (i == n - 1) ? n - 1 : i + 1;
        const double ds = samples[i1].s - samples[i0].s;
        samples[i].curvature =
            ds > 0.0 ? (samples[i1].heading - samples[i0].heading) / ds : 0.0;
    }

    return ReferencePath(std::move(samples), max_curvature);
}

FrenetPose cart_to_frenet(const ReferencePath& path, double x, double y,
                          double d_max) {
    auto fp = path.project(x, y, d_max);
    if (!fp) throw PathError("point outside the path's lateral band");
    return *fp;
}

} // namespace flowplan
