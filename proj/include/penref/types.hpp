#ifndef PENREF_TYPES_HPP_
#define PENREF_TYPES_HPP_
//! \file types.hpp
//! Shared numeric types and the exception hierarchy.
//!
//! Vectors and matrices have a runtime dimension but inline storage bounded
//! by kMaxDim, so the simulation hot loop never touches the heap.

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace penref {

inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                             kMaxDim, kMaxDim>;
using Point = Vector;

//! Points closer than this to the boundary count as "on" it.
inline constexpr double kTolBoundary = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

//! Nearest boundary point is not unique (point outside the tubular neighborhood).
class NonUniqueProjection : public Error {
 public:
  using Error::Error;
};

class NotOnBoundary : public Error {
 public:
  using Error::Error;
};

//! Reflection direction tangential to (or pointing out of) the boundary.
class InvalidReflection : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

//! Coefficient evaluated outside its declared validity region.
class OutsideValidity : public Error {
 public:
  using Error::Error;
};

Vector make_vector(std::initializer_list<double> values);
Matrix identity(int dim);
bool all_finite(const Vector& v);

}  // namespace penref

#endif  // PENREF_TYPES_HPP_
