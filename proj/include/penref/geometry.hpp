#ifndef PENREF_GEOMETRY_HPP_
#define PENREF_GEOMETRY_HPP_
//! \file geometry.hpp
//! Smooth domains with closed-form signed distance, nearest boundary point,
//! inward normal and tubular-neighborhood radius.
//!
//! Sign convention: signed_distance is positive inside D, zero on the
//! boundary and negative outside the closure. All operations are pure and a
//! Domain is immutable once built, so one instance can be shared by any
//! number of simulation workers.

#include <optional>
#include <variant>

#include "penref/rng.hpp"
#include "penref/types.hpp"

namespace penref {

inline constexpr double kHalfSpaceTubeCap = 1e6;

//! {x : x[axis] > offset}
struct HalfSpace {
  int axis = 0;
  double offset = 0.0;
};

struct Ball {
  Point center;
  double radius = 1.0;
};

//! Axis-aligned ellipsoid sum_i ((x_i - c_i) / a_i)^2 < 1.
struct Ellipsoid {
  Point center;
  Vector semi_axes;
};

//! Spherical shell inner_radius < |x - c| < outer_radius.
struct Annulus {
  Point center;
  double inner_radius = 1.0;
  double outer_radius = 2.0;
};

struct BandSpec {
  enum class Mode { two_sided, one_sided_inner };

  double width = 0.0;
  Mode mode = Mode::two_sided;

  BandSpec(double w, Mode m);
};

//! Everything the penalty and reflection code needs about one point in the tube.
struct BoundaryFootprint {
  double phi = 0.0;  //!< signed distance of the query point
  Point foot;        //!< unique nearest boundary point y(x)
  Vector normal;     //!< inward unit normal at foot
};

class Domain {
 public:
  using Shape = std::variant<HalfSpace, Ball, Ellipsoid, Annulus>;

  static Domain half_space(int dim, int axis, double offset,
                           std::optional<double> tube_radius_hint = std::nullopt);
  static Domain ball(Point center, double radius,
                     std::optional<double> tube_radius_hint = std::nullopt);
  static Domain ellipsoid(Point center, Vector semi_axes,
                          std::optional<double> tube_radius_hint = std::nullopt);
  static Domain annulus(Point center, double inner_radius, double outer_radius,
                        std::optional<double> tube_radius_hint = std::nullopt);

  int dimension() const { return dim_; }
  const Shape& shape() const { return shape_; }
  std::optional<double> tube_radius_hint() const { return hint_; }
  const char* kind_name() const;

  double signed_distance(const Point& x) const;

  //! Throws NonUniqueProjection when |phi(x)| >= tube_radius().
  Point nearest_boundary_point(const Point& x) const;

  //! Throws NotOnBoundary unless |phi(p)| <= kTolBoundary.
  Vector inward_normal(const Point& p) const;

  bool in_band(const Point& x, const BandSpec& band) const;

  //! Largest width about the boundary on which the nearest-point map is unique.
  double tube_radius() const { return tube_radius_; }

  //! Identity on the closure, nearest boundary point outside it.
  Point project_to_closure(const Point& x) const;

  //! signed distance, foot point and normal in a single evaluation.
  BoundaryFootprint footprint(const Point& x) const;

  //! sup of signed_distance over D (+inf for the half-space).
  double max_depth() const;

  //! Sample a boundary point. Half-space tangential coordinates are drawn
  //! from [-1, 1]; the curved shapes are sampled over their whole boundary.
  Point sample_boundary(RandomStream& rng) const;

 private:
  Domain(int dim, Shape shape, std::optional<double> hint);

  void check_dim(const Point& x) const;
  double compute_tube_radius() const;

  int dim_;
  Shape shape_;
  std::optional<double> hint_;
  double tube_radius_;
};

namespace detail {
//! Closest point on the centered ellipsoid with semi-axes a to the point x
//! (coordinates relative to the center). Returns nullopt when x sits on the
//! medial axis and the closest point is not unique.
struct EllipsoidProjection {
  Point closest;
  bool unique = true;
  int iterations = 0;
};
EllipsoidProjection ellipsoid_closest_point(const Vector& a, const Point& x);
}  // namespace detail

}  // namespace penref

#endif  // PENREF_GEOMETRY_HPP_
