#include "penref/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "penref/rng.hpp"

namespace penref {

SkorokhodResult skorokhod_halfline(std::span<const double> driver) {
  if (driver.empty()) throw InvalidArgument("Skorokhod map of an empty driver");
  if (driver[0] < 0.0) throw InvalidArgument("Skorokhod driver must start in [0, inf)");
  SkorokhodResult out;
  out.reflected.resize(driver.size());
  out.local_time.resize(driver.size());
  double running = 0.0;
  for (std::size_t k = 0; k < driver.size(); ++k) {
    running = std::max(running, -driver[k]);
    out.local_time[k] = running;
    out.reflected[k] = driver[k] + running;
  }
  return out;
}

void ReferenceSpec::validate() const {
  const int dim = domain.dimension();
  if (coefficients.dimension() != dim) throw DimensionMismatch("coefficients and domain differ in dimension");
  if (initial.size() != dim) throw DimensionMismatch("initial point has wrong dimension");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(dt > 0.0) || !(dt < horizon)) throw InvalidArgument("step size must satisfy 0 < dt < T");
  if (!(domain.signed_distance(initial) >= 0.0))
    throw InvalidArgument("reference initial point must lie in the closed domain");
}

std::size_t ReferenceSpec::steps() const {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(horizon / dt)));
}

double ReferenceSpec::step_size() const { return horizon / static_cast<double>(steps()); }

namespace {

void record(const ReferenceSpec& spec, ReflectedPathRecord& rec, std::size_t step,
            std::size_t steps, double h, const Point& z, double local_time) {
  if (step == 0 || step == steps || (spec.record_stride > 0 && step % spec.record_stride == 0)) {
    rec.times.push_back(static_cast<double>(step) * h);
    rec.states.push_back(z);
    rec.local_time.push_back(local_time);
  }
}

}  // namespace

ReflectedPathRecord halfspace_oblique_rbm(const ReferenceSpec& spec, const Vector& reflection,
                                          std::uint64_t seed) {
  spec.validate();
  const auto* half = std::get_if<HalfSpace>(&spec.domain.shape());
  if (!half) throw InvalidArgument("oblique Skorokhod reference needs a half-space domain");
  if (spec.coefficients.kind() != CoefficientField::Kind::constant)
    throw InvalidArgument("oblique Skorokhod reference needs constant coefficients");
  const int dim = spec.domain.dimension();
  if (reflection.size() != dim) throw DimensionMismatch("reflection vector has wrong dimension");
  if (std::abs(reflection[half->axis] - 1.0) > 1e-12)
    throw InvalidReflection("reflection must satisfy r . n = 1 on the half-space");

  const std::size_t steps = spec.steps();
  const double h = spec.step_size();
  const Vector drift_step = spec.coefficients.drift(spec.initial) * h;
  const Matrix sigma = spec.coefficients.diffusion(spec.initial) * std::sqrt(h);
  const double r_norm = reflection.norm();

  ReflectedPathRecord rec;
  rec.seed = seed;
  Point free = spec.initial;  // unreflected Euler path X
  double local_time = 0.0;
  Point z = free;
  rec.min_phi = free[half->axis] - half->offset;
  record(spec, rec, 0, steps, h, z, local_time);

  std::array<double, kMaxDim> buf{};
  std::span<double> noise(buf.data(), static_cast<std::size_t>(dim));
  Vector xi(dim);
  for (std::size_t k = 0; k < steps; ++k) {
    step_noise(seed, k, noise);
    for (int i = 0; i < dim; ++i) xi[i] = noise[static_cast<std::size_t>(i)];
    free += drift_step + sigma * xi;
    // Running maximum of -(X_d - offset): the half-line Skorokhod map online.
    local_time = std::max(local_time, half->offset - free[half->axis]);
    z = free + reflection * local_time;
    rec.min_phi = std::min(rec.min_phi, z[half->axis] - half->offset);
    record(spec, rec, k + 1, steps, h, z, local_time);
  }
  rec.final_state = z;
  rec.local_time_final = local_time;
  rec.weighted_local_time = r_norm * local_time;
  return rec;
}

ReflectedPathRecord projection_scheme(const ReferenceSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int dim = spec.domain.dimension();
  const std::size_t steps = spec.steps();
  const double h = spec.step_size();
  const double sqrt_h = std::sqrt(h);
  const bool constant_drift = spec.coefficients.has_constant_drift();
  const bool constant_diffusion = spec.coefficients.has_constant_diffusion();
  const Vector b0 = constant_drift ? spec.coefficients.drift(spec.initial) : Vector::Zero(dim);
  const Matrix s0 =
      constant_diffusion ? spec.coefficients.diffusion(spec.initial) : Matrix::Zero(dim, dim);
  const bool unit_diffusion = constant_diffusion && s0 == Matrix::Identity(dim, dim);

  ReflectedPathRecord rec;
  rec.seed = seed;
  Point z = spec.initial;
  double local_time = 0.0;
  rec.min_phi = spec.domain.signed_distance(z);
  record(spec, rec, 0, steps, h, z, local_time);

  std::array<double, kMaxDim> buf{};
  std::span<double> noise(buf.data(), static_cast<std::size_t>(dim));
  Vector xi(dim);
  try {
    for (std::size_t k = 0; k < steps; ++k) {
      step_noise(seed, k, noise);
      for (int i = 0; i < dim; ++i) xi[i] = noise[static_cast<std::size_t>(i)];
      Point trial = constant_drift ? Point(z + b0 * h) : Point(z + spec.coefficients.drift(z) * h);
      if (unit_diffusion) {
        trial += sqrt_h * xi;
      } else if (constant_diffusion) {
        trial.noalias() += s0 * (sqrt_h * xi);
      } else {
        trial.noalias() += spec.coefficients.diffusion(z) * (sqrt_h * xi);
      }
      double phi = spec.domain.signed_distance(trial);
      if (phi < -kTolBoundary) {
        if (!(-phi < spec.domain.tube_radius())) {
          std::ostringstream msg;
          msg << "projection left the tube at step " << k + 1 << " (phi = " << phi
              << "): dt too coarse";
          throw NonUniqueProjection(msg.str());
        }
        z = spec.domain.nearest_boundary_point(trial);
        local_time += (trial - z).norm();
        phi = spec.domain.signed_distance(z);
      } else {
        z = trial;
      }
      rec.min_phi = std::min(rec.min_phi, phi);
      record(spec, rec, k + 1, steps, h, z, local_time);
    }
  } catch (const OutsideValidity& e) {
    rec.status = PathStatus::outside_validity;
    rec.message = e.what();
  } catch (const Error& e) {
    rec.status = PathStatus::failed;
    rec.message = e.what();
  }
  rec.final_state = z;
  rec.local_time_final = local_time;
  rec.weighted_local_time = local_time;
  return rec;
}

const char* to_string(ReferenceKind kind) {
  return kind == ReferenceKind::skorokhod_halfspace ? "skorokhod_halfspace" : "projection";
}

ReferenceKind parse_reference_kind(const std::string& name) {
  if (name == "skorokhod_halfspace") return ReferenceKind::skorokhod_halfspace;
  if (name == "projection") return ReferenceKind::projection;
  throw InvalidArgument("unknown reference kind '" + name + "'");
}

ReferenceEnsemble simulate_reference_batch(const ReferenceSpec& spec, ReferenceKind kind,
                                           const Vector& reflection, std::size_t path_count,
                                           std::uint64_t master_seed, unsigned workers) {
  if (path_count < 1) throw InvalidArgument("path count must be at least 1");
  spec.validate();
  ReferenceEnsemble ensemble;
  ensemble.master_seed = master_seed;
  ensemble.kind = kind;
  ensemble.horizon = spec.horizon;
  ensemble.dt = spec.step_size();
  ensemble.paths.resize(path_count);
  detail::parallel_for(path_count, workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(master_seed, i);
    ensemble.paths[i] = kind == ReferenceKind::skorokhod_halfspace
                            ? halfspace_oblique_rbm(spec, reflection, seed)
                            : projection_scheme(spec, seed);
  });
  for (const auto& p : ensemble.paths) {
    if (!p.ok()) ++ensemble.failures;
  }
  return ensemble;
}

}  // namespace penref
