#ifndef PENREF_FIELDS_HPP_
#define PENREF_FIELDS_HPP_
//! \file fields.hpp
//! Drift/diffusion coefficients and the boundary reflection field.

#include <functional>
#include <memory>
#include <optional>

#include "penref/geometry.hpp"
#include "penref/types.hpp"

namespace penref {

//! Drift b and diffusion sigma, defined on an open neighborhood of the closure.
class CoefficientField {
 public:
  enum class Kind { constant, affine, user_table };

  using DriftFn = std::function<Vector(const Point&)>;
  using DiffusionFn = std::function<Matrix(const Point&)>;

  static CoefficientField constant(Vector drift, Matrix diffusion);

  //! b(x) = drift_offset + drift_matrix * x, constant sigma.
  static CoefficientField affine(Vector drift_offset, Matrix drift_matrix, Matrix diffusion);

  //! User-supplied functions, valid only where phi(x) > -validity_band.
  static CoefficientField user_table(DriftFn drift, DiffusionFn diffusion, Domain domain,
                                     double validity_band);

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  bool has_constant_diffusion() const { return kind_ != Kind::user_table; }
  bool has_constant_drift() const { return kind_ == Kind::constant; }

  Vector drift(const Point& x) const;
  Matrix diffusion(const Point& x) const;

  //! sigma_n = sigma + (perturbation / n) I, so sigma_n -> sigma as n grows.
  Matrix diffusion_n(const Point& x, int n, double perturbation) const;

  const Vector& drift_offset() const { return drift_offset_; }
  const Matrix& drift_matrix() const { return drift_matrix_; }
  const Matrix& constant_diffusion() const { return diffusion_; }

 private:
  CoefficientField() = default;
  CoefficientField as_constant() &&;
  void check_valid(const Point& x) const;

  Kind kind_ = Kind::constant;
  int dim_ = 0;
  Vector drift_offset_;
  Matrix drift_matrix_;
  Matrix diffusion_;
  DriftFn user_drift_;
  DiffusionFn user_diffusion_;
  std::optional<Domain> validity_domain_;
  double validity_band_ = 0.0;
};

//! Reflection field r on the boundary, normalized so that r . n == 1.
class ReflectionField {
 public:
  //! Raw direction as a function of boundary point and inward normal there.
  using RawField = std::function<Vector(const Point& boundary_point, const Vector& normal)>;

  //! Same direction everywhere.
  static RawField constant_raw(Vector direction);
  //! r = n.
  static RawField normal_raw();
  //! Two dimensions only: r = n + coefficient * t with t = (-n_2, n_1).
  static RawField normal_tangent_raw(double coefficient);

  ReflectionField(RawField raw, Domain domain);

  const Domain& domain() const { return domain_; }

  //! r(p) for p on the boundary (within kTolBoundary).
  Vector at(const Point& p) const;

  //! r at the foot point of a precomputed footprint.
  Vector at_footprint(const BoundaryFootprint& fp) const;

  //! r(y(x)) / |r(y(x))| for x in the tube.
  Vector unit_direction(const Point& x) const;

  //! The normalized field viewed as a raw field.
  RawField as_raw() const;

 private:
  RawField raw_;
  Domain domain_;
};

//! Divide the raw field by its normal component. Non-transversal directions
//! (raw . n <= 1e-10) raise InvalidReflection when evaluated.
ReflectionField normalize_reflection(ReflectionField::RawField raw, const Domain& domain);

//! Free-function form of ReflectionField::unit_direction.
Vector unit_direction_extension(const ReflectionField& field, const Domain& domain, const Point& x);

}  // namespace penref

#endif  // PENREF_FIELDS_HPP_
