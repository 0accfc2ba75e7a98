#include "penref/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace penref {

Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

bool all_finite(const Vector& v) { return v.allFinite(); }

BandSpec::BandSpec(double w, Mode m) : width(w), mode(m) {
  if (!(w > 0.0)) throw InvalidArgument("band width must be positive");
}

namespace {

void check_dimension(int dim) {
  if (dim < 2 || dim > kMaxDim) {
    std::ostringstream msg;
    msg << "domain dimension must lie in [2, " << kMaxDim << "], got " << dim;
    throw InvalidArgument(msg.str());
  }
}

void check_center(const Point& center, int dim) {
  if (center.size() != dim) throw DimensionMismatch("center has wrong dimension");
  if (!center.allFinite()) throw InvalidArgument("center must be finite");
}

void check_hint(std::optional<double> hint) {
  if (hint && !(*hint > 0.0)) throw InvalidArgument("tube radius hint must be positive");
}

}  // namespace

//---------------------------------------------------------------------------//
// Construction
//---------------------------------------------------------------------------//

Domain::Domain(int dim, Shape shape, std::optional<double> hint)
    : dim_(dim), shape_(std::move(shape)), hint_(hint), tube_radius_(0.0) {
  tube_radius_ = compute_tube_radius();
}

Domain Domain::half_space(int dim, int axis, double offset, std::optional<double> hint) {
  check_dimension(dim);
  check_hint(hint);
  if (axis < 0 || axis >= dim) throw InvalidArgument("half-space axis out of range");
  if (!std::isfinite(offset)) throw InvalidArgument("half-space offset must be finite");
  return Domain(dim, HalfSpace{axis, offset}, hint);
}

Domain Domain::ball(Point center, double radius, std::optional<double> hint) {
  const int dim = static_cast<int>(center.size());
  check_dimension(dim);
  check_center(center, dim);
  check_hint(hint);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
  return Domain(dim, Ball{std::move(center), radius}, hint);
}

Domain Domain::ellipsoid(Point center, Vector semi_axes, std::optional<double> hint) {
  const int dim = static_cast<int>(center.size());
  check_dimension(dim);
  check_center(center, dim);
  check_hint(hint);
  if (semi_axes.size() != dim) throw DimensionMismatch("semi-axes have wrong dimension");
  for (Eigen::Index i = 0; i < semi_axes.size(); ++i) {
    if (!(semi_axes[i] > 0.0) || !std::isfinite(semi_axes[i]))
      throw InvalidArgument("ellipsoid semi-axes must be positive");
  }
  return Domain(dim, Ellipsoid{std::move(center), std::move(semi_axes)}, hint);
}

Domain Domain::annulus(Point center, double inner_radius, double outer_radius,
                       std::optional<double> hint) {
  const int dim = static_cast<int>(center.size());
  check_dimension(dim);
  check_center(center, dim);
  check_hint(hint);
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius) || !std::isfinite(outer_radius))
    throw InvalidArgument("annulus needs 0 < inner_radius < outer_radius");
  return Domain(dim, Annulus{std::move(center), inner_radius, outer_radius}, hint);
}

const char* Domain::kind_name() const {
  struct Visitor {
    const char* operator()(const HalfSpace&) const { return "half_space"; }
    const char* operator()(const Ball&) const { return "ball"; }
    const char* operator()(const Ellipsoid&) const { return "ellipsoid"; }
    const char* operator()(const Annulus&) const { return "annulus"; }
  };
  return std::visit(Visitor{}, shape_);
}

double Domain::compute_tube_radius() const {
  struct Visitor {
    std::optional<double> hint;
    double operator()(const HalfSpace&) const { return hint.value_or(kHalfSpaceTubeCap); }
    double operator()(const Ball& b) const { return b.radius; }
    double operator()(const Ellipsoid& e) const {
      return e.semi_axes.minCoeff() * e.semi_axes.minCoeff() / e.semi_axes.maxCoeff();
    }
    double operator()(const Annulus& a) const {
      return std::min(a.inner_radius, 0.5 * (a.outer_radius - a.inner_radius));
    }
  };
  const double natural = std::visit(Visitor{hint_}, shape_);
  if (std::holds_alternative<HalfSpace>(shape_) || !hint_) return natural;
  return std::min(natural, *hint_);
}

namespace {
[[noreturn]] void throw_dim_mismatch(Eigen::Index got, int want) {
  std::ostringstream msg;
  msg << "point has dimension " << got << ", domain has dimension " << want;
  throw DimensionMismatch(msg.str());
}
}  // namespace

void Domain::check_dim(const Point& x) const {
  if (x.size() != dim_) [[unlikely]] throw_dim_mismatch(x.size(), dim_);
}

//---------------------------------------------------------------------------//
// Ellipsoid closest point
//---------------------------------------------------------------------------//

namespace detail {

EllipsoidProjection ellipsoid_closest_point(const Vector& a, const Point& x) {
  const Eigen::Index dim = a.size();
  const Vector a2 = a.cwiseProduct(a);
  const double m = a2.minCoeff();

  // Mass of x on the axes of smallest semi-axis: these drive the pole of F at t = -m.
  double pole_mass = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (a2[i] == m) pole_mass += x[i] * x[i];
  }

  // F(t) = sum (a_i x_i / (a_i^2 + t))^2 - 1 is convex and decreasing on (-m, inf).
  auto eval = [&](double t, double& f, double& df) {
    f = -1.0;
    df = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (x[i] == 0.0) continue;
      const double denom = a2[i] + t;
      const double q = a[i] * x[i] / denom;
      f += q * q;
      df -= 2.0 * q * q / denom;
    }
  };

  EllipsoidProjection out;
  double lo = 0.0;
  if (pole_mass > 0.0) {
    lo = -m + std::sqrt(m * pole_mass);
  } else {
    double rest = -1.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (a2[i] != m) {
        const double q = a[i] * x[i] / (a2[i] - m);
        rest += q * q;
      }
    }
    if (rest <= 0.0) {
      // x lies on the medial set: the closest point leaves the plane of the
      // minor axes and is reached from both sides.
      out.closest = Point::Zero(dim);
      double used = 0.0;
      Eigen::Index free_axis = -1;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (a2[i] == m) {
          if (free_axis < 0) free_axis = i;
          continue;
        }
        out.closest[i] = a2[i] * x[i] / (a2[i] - m);
        used += (out.closest[i] / a[i]) * (out.closest[i] / a[i]);
      }
      out.closest[free_axis] = std::sqrt(std::max(0.0, m * (1.0 - used)));
      out.unique = false;
      return out;
    }
    lo = -m;
  }
  double hi = -m + (a.cwiseProduct(x)).norm();

  double t = lo;
  for (int it = 0; it < 100; ++it) {
    out.iterations = it + 1;
    double f, df;
    eval(t, f, df);
    if (f == 0.0) break;
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    double next = t - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - t;
    t = next;
    if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(t))) break;
  }

  out.closest = Point(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out.closest[i] = x[i] == 0.0 ? 0.0 : a2[i] * x[i] / (a2[i] + t);
  return out;
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Queries
//---------------------------------------------------------------------------//

double Domain::signed_distance(const Point& x) const {
  check_dim(x);
  struct Visitor {
    const Point& x;
    double operator()(const HalfSpace& h) const { return x[h.axis] - h.offset; }
    double operator()(const Ball& b) const { return b.radius - (x - b.center).norm(); }
    double operator()(const Ellipsoid& e) const {
      const Point rel = x - e.center;
      const auto proj = detail::ellipsoid_closest_point(e.semi_axes, rel);
      const double dist = (rel - proj.closest).norm();
      const double level = rel.cwiseQuotient(e.semi_axes).squaredNorm();
      if (level < 1.0) return dist;
      if (level > 1.0) return -dist;
      return 0.0;
    }
    double operator()(const Annulus& a) const {
      const double rho = (x - a.center).norm();
      return std::min(rho - a.inner_radius, a.outer_radius - rho);
    }
  };
  return std::visit(Visitor{x}, shape_);
}

BoundaryFootprint Domain::footprint(const Point& x) const {
  check_dim(x);
  BoundaryFootprint fp;
  struct Visitor {
    const Point& x;
    BoundaryFootprint& fp;
    bool operator()(const HalfSpace& h) const {
      fp.phi = x[h.axis] - h.offset;
      fp.foot = x;
      fp.foot[h.axis] = h.offset;
      fp.normal = Vector::Zero(x.size());
      fp.normal[h.axis] = 1.0;
      return true;
    }
    bool operator()(const Ball& b) const {
      const Vector rel = x - b.center;
      const double rho = rel.norm();
      fp.phi = b.radius - rho;
      if (rho == 0.0) return false;
      const Vector u = rel / rho;
      fp.foot = b.center + b.radius * u;
      fp.normal = -u;
      return true;
    }
    bool operator()(const Ellipsoid& e) const {
      const Point rel = x - e.center;
      const auto proj = detail::ellipsoid_closest_point(e.semi_axes, rel);
      const double dist = (rel - proj.closest).norm();
      const double level = rel.cwiseQuotient(e.semi_axes).squaredNorm();
      fp.phi = level < 1.0 ? dist : (level > 1.0 ? -dist : 0.0);
      fp.foot = e.center + proj.closest;
      Vector grad = proj.closest.cwiseQuotient(e.semi_axes.cwiseProduct(e.semi_axes));
      fp.normal = -grad / grad.norm();
      return proj.unique;
    }
    bool operator()(const Annulus& a) const {
      const Vector rel = x - a.center;
      const double rho = rel.norm();
      const double inner_gap = rho - a.inner_radius;
      const double outer_gap = a.outer_radius - rho;
      fp.phi = std::min(inner_gap, outer_gap);
      if (rho == 0.0 || inner_gap == outer_gap) return false;
      const Vector u = rel / rho;
      if (inner_gap < outer_gap) {
        fp.foot = a.center + a.inner_radius * u;
        fp.normal = u;
      } else {
        fp.foot = a.center + a.outer_radius * u;
        fp.normal = -u;
      }
      return true;
    }
  };
  const bool unique = std::visit(Visitor{x, fp}, shape_);
  if (!unique || !(std::abs(fp.phi) < tube_radius_)) {
    std::ostringstream msg;
    msg << "nearest boundary point not unique: |phi| = " << std::abs(fp.phi)
        << " is outside the tube of radius " << tube_radius_;
    throw NonUniqueProjection(msg.str());
  }
  return fp;
}

Point Domain::nearest_boundary_point(const Point& x) const { return footprint(x).foot; }

Vector Domain::inward_normal(const Point& p) const {
  check_dim(p);
  const double phi = signed_distance(p);
  if (std::abs(phi) > kTolBoundary) {
    std::ostringstream msg;
    msg << "point is not on the boundary (phi = " << phi << ")";
    throw NotOnBoundary(msg.str());
  }
  return footprint(p).normal;
}

bool Domain::in_band(const Point& x, const BandSpec& band) const {
  const double phi = signed_distance(x);
  if (band.mode == BandSpec::Mode::two_sided) return std::abs(phi) < band.width;
  return phi > -band.width;
}

Point Domain::project_to_closure(const Point& x) const {
  // Points within kTolBoundary of the closure are left alone; this makes the
  // projection exactly idempotent despite rounding in the foot point.
  if (signed_distance(x) >= -kTolBoundary) return x;
  return nearest_boundary_point(x);
}

double Domain::max_depth() const {
  struct Visitor {
    double operator()(const HalfSpace&) const { return std::numeric_limits<double>::infinity(); }
    double operator()(const Ball& b) const { return b.radius; }
    double operator()(const Ellipsoid& e) const { return e.semi_axes.minCoeff(); }
    double operator()(const Annulus& a) const { return 0.5 * (a.outer_radius - a.inner_radius); }
  };
  return std::visit(Visitor{}, shape_);
}

namespace {
Vector random_direction(RandomStream& rng, int dim) {
  Vector u(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) u[i] = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  return u / norm;
}
}  // namespace

Point Domain::sample_boundary(RandomStream& rng) const {
  struct Visitor {
    RandomStream& rng;
    int dim;
    Point operator()(const HalfSpace& h) const {
      Point p(dim);
      for (int i = 0; i < dim; ++i) p[i] = 2.0 * rng.uniform() - 1.0;
      p[h.axis] = h.offset;
      return p;
    }
    Point operator()(const Ball& b) const { return b.center + b.radius * random_direction(rng, dim); }
    Point operator()(const Ellipsoid& e) const {
      return e.center + e.semi_axes.cwiseProduct(random_direction(rng, dim));
    }
    Point operator()(const Annulus& a) const {
      const double inner_area = std::pow(a.inner_radius, dim - 1);
      const double outer_area = std::pow(a.outer_radius, dim - 1);
      const bool inner = rng.uniform() * (inner_area + outer_area) < inner_area;
      const double radius = inner ? a.inner_radius : a.outer_radius;
      return a.center + radius * random_direction(rng, dim);
    }
  };
  return std::visit(Visitor{rng, dim_}, shape_);
}

}  // namespace penref
