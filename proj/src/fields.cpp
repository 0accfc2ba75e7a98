#include "penref/fields.hpp"

#include <cmath>
#include <sstream>

namespace penref {

namespace {

constexpr double kSingularDeterminant = 1e-12;
constexpr double kTransversalTol = 1e-10;

//! The zero matrix is accepted as the deterministic special case.
void check_nonsingular(const Matrix& sigma) {
  if (sigma.allFinite() && sigma.isZero(0.0)) return;
  if (!sigma.allFinite() || std::abs(sigma.determinant()) <= kSingularDeterminant)
    throw InvalidArgument("diffusion matrix is singular");
}

void check_square(const Matrix& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream msg;
    msg << what << " must be " << dim << "x" << dim;
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

//---------------------------------------------------------------------------//
// CoefficientField
//---------------------------------------------------------------------------//

CoefficientField CoefficientField::constant(Vector drift, Matrix diffusion) {
  const int dim = static_cast<int>(drift.size());
  return affine(std::move(drift), Matrix::Zero(dim, dim), std::move(diffusion)).as_constant();
}

CoefficientField CoefficientField::affine(Vector drift_offset, Matrix drift_matrix,
                                          Matrix diffusion) {
  const int dim = static_cast<int>(drift_offset.size());
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("coefficient dimension out of range");
  check_square(drift_matrix, dim, "drift matrix");
  check_square(diffusion, dim, "diffusion matrix");
  if (!drift_offset.allFinite() || !drift_matrix.allFinite())
    throw InvalidArgument("drift must be finite");
  check_nonsingular(diffusion);
  CoefficientField field;
  field.kind_ = Kind::affine;
  field.dim_ = dim;
  field.drift_offset_ = std::move(drift_offset);
  field.drift_matrix_ = std::move(drift_matrix);
  field.diffusion_ = std::move(diffusion);
  return field;
}

CoefficientField CoefficientField::as_constant() && {
  if (!drift_matrix_.isZero(0.0)) throw InvalidArgument("drift is not constant");
  kind_ = Kind::constant;
  return std::move(*this);
}

CoefficientField CoefficientField::user_table(DriftFn drift, DiffusionFn diffusion, Domain domain,
                                              double validity_band) {
  if (!drift || !diffusion) throw InvalidArgument("user coefficients need both functions");
  if (!(validity_band > 0.0)) throw InvalidArgument("validity band must be positive");
  CoefficientField field;
  field.kind_ = Kind::user_table;
  field.dim_ = domain.dimension();
  field.user_drift_ = std::move(drift);
  field.user_diffusion_ = std::move(diffusion);
  field.validity_domain_ = std::move(domain);
  field.validity_band_ = validity_band;
  return field;
}

void CoefficientField::check_valid(const Point& x) const {
  if (x.size() != dim_) throw DimensionMismatch("coefficient evaluated at wrong dimension");
  if (kind_ != Kind::user_table) return;
  const double phi = validity_domain_->signed_distance(x);
  if (!(phi > -validity_band_)) {
    std::ostringstream msg;
    msg << "coefficient evaluated outside its validity band (phi = " << phi << ")";
    throw OutsideValidity(msg.str());
  }
}

Vector CoefficientField::drift(const Point& x) const {
  check_valid(x);
  switch (kind_) {
    case Kind::constant:
      return drift_offset_;
    case Kind::affine:
      return drift_offset_ + drift_matrix_ * x;
    case Kind::user_table:
      break;
  }
  Vector b = user_drift_(x);
  if (b.size() != dim_) throw DimensionMismatch("user drift has wrong dimension");
  return b;
}

Matrix CoefficientField::diffusion(const Point& x) const {
  check_valid(x);
  if (kind_ != Kind::user_table) return diffusion_;
  Matrix sigma = user_diffusion_(x);
  check_square(sigma, dim_, "user diffusion");
  check_nonsingular(sigma);
  return sigma;
}

Matrix CoefficientField::diffusion_n(const Point& x, int n, double perturbation) const {
  Matrix sigma = diffusion(x);
  if (perturbation != 0.0) sigma += (perturbation / n) * Matrix::Identity(dim_, dim_);
  return sigma;
}

//---------------------------------------------------------------------------//
// ReflectionField
//---------------------------------------------------------------------------//

ReflectionField::RawField ReflectionField::constant_raw(Vector direction) {
  return [direction = std::move(direction)](const Point&, const Vector&) { return direction; };
}

ReflectionField::RawField ReflectionField::normal_raw() {
  return [](const Point&, const Vector& normal) { return normal; };
}

ReflectionField::RawField ReflectionField::normal_tangent_raw(double coefficient) {
  return [coefficient](const Point&, const Vector& normal) {
    if (normal.size() != 2) throw DimensionMismatch("normal-tangent reflection is two-dimensional");
    Vector r = normal;
    r[0] += -coefficient * normal[1];
    r[1] += coefficient * normal[0];
    return r;
  };
}

ReflectionField::ReflectionField(RawField raw, Domain domain)
    : raw_(std::move(raw)), domain_(std::move(domain)) {
  if (!raw_) throw InvalidArgument("reflection field is empty");
}

Vector ReflectionField::at_footprint(const BoundaryFootprint& fp) const {
  const Vector raw = raw_(fp.foot, fp.normal);
  if (raw.size() != fp.normal.size()) throw DimensionMismatch("reflection has wrong dimension");
  const double normal_part = raw.dot(fp.normal);
  if (!(normal_part > kTransversalTol)) {
    std::ostringstream msg;
    msg << "reflection direction is not transversal to the boundary (r . n = " << normal_part
        << ")";
    throw InvalidReflection(msg.str());
  }
  return raw / normal_part;
}

Vector ReflectionField::at(const Point& p) const {
  const double phi = domain_.signed_distance(p);
  if (std::abs(phi) > kTolBoundary) throw NotOnBoundary("reflection evaluated off the boundary");
  return at_footprint(domain_.footprint(p));
}

Vector ReflectionField::unit_direction(const Point& x) const {
  const Vector r = at_footprint(domain_.footprint(x));
  return r / r.norm();
}

ReflectionField::RawField ReflectionField::as_raw() const {
  return [self = *this](const Point& p, const Vector& normal) {
    BoundaryFootprint fp;
    fp.phi = 0.0;
    fp.foot = p;
    fp.normal = normal;
    return self.at_footprint(fp);
  };
}

ReflectionField normalize_reflection(ReflectionField::RawField raw, const Domain& domain) {
  return ReflectionField(std::move(raw), domain);
}

Vector unit_direction_extension(const ReflectionField& field, const Domain& domain,
                                const Point& x) {
  if (domain.dimension() != field.domain().dimension())
    throw DimensionMismatch("reflection and domain dimensions differ");
  const Vector r = field.at_footprint(domain.footprint(x));
  return r / r.norm();
}

}  // namespace penref
