#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace flowplan {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Pose in road-aligned coordinates: s = arc length along the reference
/// path, d = signed lateral offset (positive on the left of the tangent).
struct FrenetPose {
    double s = 0.0;
    double d = 0.0;
    double s_dot = 0.0;
    double d_dot = 0.0;
};

struct PathSample {
    double s = 0.0;      // arc length [m]
    double x = 0.0;      // [m]
    double y = 0.0;      // [m]
    double heading = 0.0; // tangent direction, unwrapped [rad]
    double curvature = 0.0; // [1/m]
};

class PathError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Arc-length-parameterized route centerline. Positions are piecewise
/// linear between uniformly spaced samples; heading and curvature come
/// from centered finite differences. Immutable after construction.
class ReferencePath {
  public:
    ReferencePath(std::vector<PathSample> samples, double max_curvature);

    double total_length() const { return samples_.back().s; }
    const std::vector<PathSample>& samples() const { return samples_; }

    /// Interpolated sample at arc length s, clamped to [0, total_length].
    /// Positions extrapolate along the end tangents when s is clamped.
    PathSample sample_at(double s) const;

    double heading_at(double s) const { return sample_at(s).heading; }
    double curvature_at(double s) const { return sample_at(s).curvature; }

    /// Frenet -> Cartesian. Throws PathError for s outside [0, total_length].
    void to_cartesian(const FrenetPose& fp, double& x, double& y,
                      double& heading) const;

    /// Cartesian -> Frenet by perpendicular projection onto the polyline.
    /// Returns nullopt when the point is farther than d_max from the path
    /// or projects beyond either end. Ties pick the smaller s.
    std::optional<FrenetPose> project(double x, double y,
                                      double d_max = 20.0) const;

  private:
    std::vector<PathSample> samples_;
    double step_ = 0.0; // uniform arc spacing between samples
};

/// Resamples the waypoint polyline at uniform arc-length steps and fits
/// heading/curvature by centered differences. Rejects fewer than two
/// waypoints or coincident consecutive waypoints.
ReferencePath build_reference_path(const std::vector<Vec2>& waypoints,
                                   double resample_step,
                                   double max_curvature = 0.2);

/// Frenet <-> Cartesian wrappers matching the planner's conventions.
FrenetPose cart_to_frenet(const ReferencePath& path, double x, double y,
                          double d_max = 20.0);

inline double wrap_angle(double a) {
    while (a > 3.14159265358979323846) a -= 2.0 * 3.14159265358979323846;
    while (a < -3.14159265358979323846) a += 2.0 * 3.14159265358979323846;
    return a;
}

} // namespace flowplan
