#include "penref/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "penref/rng.hpp"

namespace penref {

namespace {
constexpr double kBlowUpNorm = 1e9;
constexpr std::uint64_t kMaxSubsteps = 1'000'000;
}  // namespace

//---------------------------------------------------------------------------//
// StoppingRegion / ModelSpec
//---------------------------------------------------------------------------//

StoppingRegion StoppingRegion::ball(Point center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("stopping ball radius must be positive");
  StoppingRegion region;
  region.kind = Kind::ball;
  region.center = std::move(center);
  region.radius = radius;
  return region;
}

StoppingRegion StoppingRegion::band(double depth) {
  if (!(depth > 0.0)) throw InvalidArgument("stopping band depth must be positive");
  StoppingRegion region;
  region.kind = Kind::band;
  region.depth = depth;
  return region;
}

bool StoppingRegion::contains(const Domain& domain, const Point& x) const {
  switch (kind) {
    case Kind::everywhere:
      return true;
    case Kind::ball:
      return (x - center).norm() < radius;
    case Kind::band:
      return domain.signed_distance(x) > -depth;
  }
  return true;
}

std::size_t ModelSpec::steps() const {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(horizon / dt)));
}

double ModelSpec::step_size() const { return horizon / static_cast<double>(steps()); }

int ModelSpec::penalty_index() const { return penalty ? penalty->schedule().index() : 0; }

double ModelSpec::effective_stiffness_cap() const {
  if (stiffness_cap) return *stiffness_cap;
  double cap = 0.5 * domain.tube_radius();
  if (penalty) cap = std::min(cap, 0.25 * penalty->schedule().length_scale());
  return cap;
}

void ModelSpec::validate() const {
  const int dim = domain.dimension();
  if (coefficients.dimension() != dim) throw DimensionMismatch("coefficients and domain differ in dimension");
  if (initial.size() != dim) throw DimensionMismatch("initial point has wrong dimension");
  if (!initial.allFinite()) throw InvalidArgument("initial point must be finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
  if (!(dt > 0.0) || !(dt < horizon)) throw InvalidArgument("step size must satisfy 0 < dt < T");
  if (!(domain.signed_distance(initial) > 0.0))
    throw InvalidArgument("initial point must lie strictly inside the domain");
  if (!stopping.contains(domain, initial))
    throw InvalidArgument("initial point must lie inside the stopping region");
  if (stopping.kind == StoppingRegion::Kind::ball && stopping.center.size() != dim)
    throw DimensionMismatch("stopping ball center has wrong dimension");
  if (!(sigma_perturbation >= 0.0)) throw InvalidArgument("sigma perturbation must be nonnegative");
  if (stiffness_cap && !(*stiffness_cap > 0.0)) throw InvalidArgument("stiffness cap must be positive");
  if (penalty && penalty->domain().dimension() != dim)
    throw DimensionMismatch("penalty field and domain differ in dimension");
}

const char* to_string(PathStatus status) {
  switch (status) {
    case PathStatus::ok:
      return "ok";
    case PathStatus::blow_up:
      return "blow_up";
    case PathStatus::outside_validity:
      return "outside_validity";
    case PathStatus::failed:
      return "failed";
  }
  return "?";
}

//---------------------------------------------------------------------------//
// Single path
//---------------------------------------------------------------------------//

void step_noise(std::uint64_t seed, std::uint64_t step, std::span<double> out) {
  const auto lo = static_cast<std::uint32_t>(step);
  const auto hi = static_cast<std::uint32_t>(step >> 32);
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto pair = gaussian_pair(seed, lo, hi, static_cast<std::uint32_t>(j / 2));
    out[j] = pair[0];
    if (j + 1 < out.size()) out[j + 1] = pair[1];
  }
}

namespace {

struct PenaltyStep {
  Vector value;
  double magnitude = 0.0;
};

PenaltyStep eval_penalty(const ModelSpec& spec, const Point& x) {
  if (!spec.penalty) return {Vector::Zero(x.size()), 0.0};
  PenaltyEvaluation e = spec.penalty->evaluate(x);
  return {std::move(e.value), e.magnitude};
}

PenaltyStep eval_penalty(const ModelSpec& spec, const Point& x, double phi) {
  if (!spec.penalty) return {Vector::Zero(x.size()), 0.0};
  PenaltyEvaluation e = spec.penalty->evaluate(x, phi);
  return {std::move(e.value), e.magnitude};
}

void run_path(const ModelSpec& spec, PathRecord& rec) {
  const int dim = spec.domain.dimension();
  const std::size_t steps = spec.steps();
  const double h = spec.step_size();
  const double sqrt_h = std::sqrt(h);
  const double cap = spec.effective_stiffness_cap();
  const int n = std::max(1, spec.penalty_index());
  const bool constant_drift = spec.coefficients.has_constant_drift();
  const bool constant_diffusion = spec.coefficients.has_constant_diffusion();

  Point x = spec.initial;
  const Vector b0 = constant_drift ? spec.coefficients.drift(x) : Vector::Zero(dim);
  const Matrix sigma0 = constant_diffusion
                            ? spec.coefficients.diffusion_n(x, n, spec.sigma_perturbation)
                            : Matrix::Zero(dim, dim);
  const bool unit_diffusion = constant_diffusion && sigma0 == Matrix::Identity(dim, dim);

  rec.stiffness_cap = cap;
  rec.L = Vector::Zero(dim);
  rec.l = 0.0;
  double phi = spec.domain.signed_distance(x);
  rec.min_phi = phi;
  rec.times.push_back(0.0);
  rec.states.push_back(x);

  std::array<double, kMaxDim> noise_buf{};
  std::span<double> noise(noise_buf.data(), static_cast<std::size_t>(dim));
  Vector xi(dim);

  auto drift_at = [&](const Point& y) { return constant_drift ? b0 : spec.coefficients.drift(y); };

  std::size_t k = 0;
  for (; k < steps; ++k) {
    step_noise(rec.seed, k, noise);
    for (int i = 0; i < dim; ++i) xi[i] = noise[static_cast<std::size_t>(i)];
    Matrix sigma_x;
    if (!constant_diffusion) sigma_x = spec.coefficients.diffusion_n(x, n, spec.sigma_perturbation);
    const Matrix& sigma = constant_diffusion ? sigma0 : sigma_x;

    PenaltyStep f = eval_penalty(spec, x, phi);
    Point next;
    if (f.magnitude * h <= cap) {
      next = x + (drift_at(x) + f.value) * h;
      rec.L += f.value * h;
      rec.l += f.magnitude * h;
    } else {
      // Stiff drift: integrate b + f_n over the step in substeps that move
      // the state at most `cap`, then apply the Brownian increment once.
      ++rec.split_steps;
      Point y = x;
      double remaining = h;
      std::uint64_t taken = 0;
      while (remaining > 0.0) {
        ++rec.substeps;
        if (++taken > kMaxSubsteps) {
          rec.status = PathStatus::failed;
          rec.message = "drift splitting did not terminate";
          break;
        }
        const double sub = f.magnitude > 0.0 ? std::min(remaining, cap / f.magnitude) : remaining;
        y += (drift_at(y) + f.value) * sub;
        rec.L += f.value * sub;
        rec.l += f.magnitude * sub;
        remaining -= sub;
        if (remaining <= h * 1e-15) break;
        if (!y.allFinite()) break;
        f = eval_penalty(spec, y);
      }
      if (!rec.ok()) break;
      next = y;
    }
    if (unit_diffusion) {
      next += sqrt_h * xi;
    } else {
      next.noalias() += sigma * (sqrt_h * xi);
    }

    if (!next.allFinite() || next.norm() > kBlowUpNorm) {
      rec.status = PathStatus::blow_up;
      std::ostringstream msg;
      msg << "state diverged at step " << k + 1;
      rec.message = msg.str();
      break;
    }
    x = next;
    const double t = static_cast<double>(k + 1) * h;
    phi = spec.domain.signed_distance(x);
    rec.min_phi = std::min(rec.min_phi, phi);
    const bool exited = !spec.stopping.contains(spec.domain, x);
    if (exited || (spec.record_stride > 0 && (k + 1) % spec.record_stride == 0) || k + 1 == steps) {
      rec.times.push_back(t);
      rec.states.push_back(x);
    }
    if (exited) {
      rec.exit_time = t;
      ++k;
      break;
    }
  }

  rec.final_state = x;
  if (!rec.ok() || !rec.exit_time) return;
  // Frozen after exit: pad the remaining recording grid with the exit state.
  if (spec.record_stride > 0) {
    for (std::size_t j = k + 1; j <= steps; ++j) {
      if (j % spec.record_stride == 0 || j == steps) {
        rec.times.push_back(static_cast<double>(j) * h);
        rec.states.push_back(x);
      }
    }
  } else if (k < steps) {
    rec.times.push_back(spec.horizon);
    rec.states.push_back(x);
  }
}

}  // namespace

PathRecord simulate_path(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  PathRecord rec;
  rec.seed = seed;
  try {
    run_path(spec, rec);
  } catch (const OutsideValidity& e) {
    rec.status = PathStatus::outside_validity;
    rec.message = e.what();
  } catch (const Error& e) {
    rec.status = PathStatus::failed;
    rec.message = e.what();
  }
  if (rec.final_state.size() == 0) rec.final_state = rec.states.back();
  return rec;
}

//---------------------------------------------------------------------------//
// Batches
//---------------------------------------------------------------------------//

namespace detail {

unsigned resolve_workers(unsigned workers) {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

Ensemble simulate_batch(const ModelSpec& spec, std::size_t path_count, std::uint64_t master_seed,
                        unsigned workers) {
  if (path_count < 1) throw InvalidArgument("path count must be at least 1");
  spec.validate();
  Ensemble ensemble;
  ensemble.master_seed = master_seed;
  ensemble.penalty_index = spec.penalty_index();
  ensemble.horizon = spec.horizon;
  ensemble.dt = spec.step_size();
  ensemble.paths.resize(path_count);
  detail::parallel_for(path_count, workers, [&](std::size_t i) {
    ensemble.paths[i] = simulate_path(spec, derive_seed(master_seed, i));
  });
  for (const auto& p : ensemble.paths) {
    if (!p.ok()) ++ensemble.failures;
  }
  return ensemble;
}

//---------------------------------------------------------------------------//
// Path functionals
//---------------------------------------------------------------------------//

double stieltjes_accumulate(std::span<const double> integrand,
                            std::span<const double> accumulator) {
  if (integrand.size() != accumulator.size())
    throw InvalidArgument("integrand and accumulator lengths differ");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < accumulator.size(); ++k) {
    const double increment = accumulator[k + 1] - accumulator[k];
    if (increment < 0.0) throw InvalidArgument("accumulator decreases: not a valid local-time proxy");
    total += integrand[k] * increment;
  }
  return total;
}

ProbabilityEstimate min_phi_statistic(const Ensemble& ensemble, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  ProbabilityEstimate out;
  std::size_t inside = 0;
  for (const auto& p : ensemble.paths) {
    if (!p.ok()) continue;
    ++out.count;
    if (p.min_phi > -eta) ++inside;
  }
  if (out.count == 0) throw InvalidArgument("min-phi statistic of an empty ensemble");
  const double n = static_cast<double>(out.count);
  out.estimate = static_cast<double>(inside) / n;
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

}  // namespace penref
