#include "penref/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace penref {

using nlohmann::ordered_json;

ConfigError::ConfigError(int line, const std::string& message)
    : Error(line > 0 ? "config error at line " + std::to_string(line) + ": " + message
                     : "config error: " + message),
      line_(line) {}

namespace {

using KeyPath = std::vector<std::string>;

std::string join(const KeyPath& path) {
  std::string out;
  for (const auto& k : path) out += "/" + k;
  return out.empty() ? "/" : out;
}

//! Line of the last key in `path`, found by locating each key in turn.
int line_of(const std::string& text, const KeyPath& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    if (!key.empty() && std::all_of(key.begin(), key.end(), ::isdigit)) continue;
    const std::string quoted = "\"" + key + "\"";
    std::size_t found = pos;
    while (true) {
      found = text.find(quoted, found);
      if (found == std::string::npos) break;
      std::size_t after = found + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      found += quoted.size();
    }
    if (found == std::string::npos) break;
    pos = found;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

//! Cursor over one JSON object that records which keys were read and
//! rejects the rest.
class Reader {
 public:
  Reader(const ordered_json& node, KeyPath path, const std::string& text)
      : node_(node), path_(std::move(path)), text_(text) {
    if (!node_.is_object()) fail_here("expected an object at " + join(path_));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    KeyPath p = path_;
    p.push_back(key);
    throw ConfigError(line_of(text_, p), join(p) + ": " + message);
  }

  [[noreturn]] void fail_here(const std::string& message) const {
    throw ConfigError(path_.empty() ? 1 : line_of(text_, path_), message);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) fail(key, "missing required key");
    return node_.at(key);
  }

  Reader child(const std::string& key) {
    KeyPath p = path_;
    p.push_back(key);
    return Reader(raw(key), p, text_);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key) || raw(key).is_null()) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) {
      if (!row.is_array()) fail(key, "expected an array of rows");
      std::vector<double> r;
      for (const auto& e : row) {
        if (!e.is_number()) fail(key, "matrix entries must be numbers");
        r.push_back(e.get<double>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  //! Reject keys that were never read.
  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) fail(item.key(), "unknown key");
    }
  }

  const KeyPath& path() const { return path_; }

 private:
  const ordered_json& node_;
  KeyPath path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

DomainConfig read_domain(Reader r) {
  DomainConfig d;
  d.kind = r.string("kind");
  if (d.kind == "half_space") {
    d.dimension = static_cast<int>(r.integer("dimension"));
    d.axis = static_cast<int>(r.integer("axis"));
    d.offset = r.number_or("offset", 0.0);
  } else if (d.kind == "ball") {
    d.center = r.numbers("center");
    d.radius = r.number("radius");
  } else if (d.kind == "ellipsoid") {
    d.center = r.numbers("center");
    d.semi_axes = r.numbers("semi_axes");
  } else if (d.kind == "annulus") {
    d.center = r.numbers("center");
    d.inner_radius = r.number("inner_radius");
    d.outer_radius = r.number("outer_radius");
  } else {
    r.fail("kind", "unknown domain kind '" + d.kind + "'");
  }
  if (d.kind != "half_space") d.dimension = static_cast<int>(d.center.size());
  d.tube_radius_hint = r.optional_number("tube_radius_hint");
  r.finish();
  return d;
}

CoefficientConfig read_coefficients(Reader r) {
  CoefficientConfig c;
  c.kind = r.string("kind");
  if (c.kind != "constant" && c.kind != "affine")
    r.fail("kind", "coefficient kind must be 'constant' or 'affine'");
  c.drift = r.numbers("drift");
  if (c.kind == "affine") c.drift_matrix = r.matrix("drift_matrix");
  c.diffusion = r.matrix("diffusion");
  c.sigma_perturbation = r.number_or("sigma_perturbation", 0.0);
  r.finish();
  return c;
}

ReflectionConfig read_reflection(Reader r) {
  ReflectionConfig c;
  c.kind = r.string("kind");
  if (c.kind == "constant") {
    c.vector = r.numbers("vector");
  } else if (c.kind == "normal_tangent") {
    c.tangent_coefficient = r.number("tangent_coefficient");
  } else if (c.kind != "normal") {
    r.fail("kind", "unknown reflection kind '" + c.kind + "'");
  }
  r.finish();
  return c;
}

PenaltyConfig read_penalty(Reader r) {
  PenaltyConfig p;
  p.family = r.string("family");
  if (p.family == "scaled_bump") {
    p.profile = r.string("profile");
    p.a_exponent = r.number("a_exponent");
    p.c_exponent = r.number("c_exponent");
  } else if (p.family == "constant") {
    p.value = r.number("value");
  } else if (p.family != "exponential" && p.family != "projection" && p.family != "none") {
    r.fail("family", "unknown penalty family '" + p.family + "'");
  }
  if (r.has("direction")) p.direction = r.string("direction");
  if (r.has("n_grid")) p.n_grid = r.integers("n_grid");
  p.cutoff = r.optional_number("cutoff");
  r.finish();
  return p;
}

StoppingConfig read_stopping(Reader r) {
  StoppingConfig s;
  s.kind = r.string("kind");
  if (s.kind == "ball") {
    s.center = r.numbers("center");
    s.radius = r.number("radius");
  } else if (s.kind == "band") {
    s.depth = r.number("depth");
  } else if (s.kind != "everywhere") {
    r.fail("kind", "unknown stopping region '" + s.kind + "'");
  }
  r.finish();
  return s;
}

IntegratorConfig read_integrator(Reader r) {
  IntegratorConfig c;
  c.initial_point = r.numbers("initial_point");
  c.horizon = r.number("horizon");
  c.dt = r.number("dt");
  c.paths = static_cast<std::size_t>(r.unsigned_integer("paths"));
  c.master_seed = r.unsigned_integer("master_seed");
  c.stiffness_cap = r.optional_number("stiffness_cap");
  if (r.has("stopping")) c.stopping = read_stopping(r.child("stopping"));
  if (r.has("record_stride")) c.record_stride = static_cast<std::size_t>(r.unsigned_integer("record_stride"));
  r.finish();
  return c;
}

ReferenceConfig read_reference(Reader r) {
  ReferenceConfig c;
  c.kind = r.string("kind");
  if (c.kind != "none" && c.kind != "skorokhod_halfspace" && c.kind != "projection")
    r.fail("kind", "unknown reference kind '" + c.kind + "'");
  c.dt = r.optional_number("dt");
  if (r.has("paths")) c.paths = static_cast<std::size_t>(r.unsigned_integer("paths"));
  if (r.has("master_seed")) c.master_seed = r.unsigned_integer("master_seed");
  r.finish();
  return c;
}

CertifyConfig read_certify(Reader r) {
  CertifyConfig c;
  if (r.has("epsilons")) c.epsilons = r.numbers("epsilons");
  if (r.has("s_grid")) c.s_grid = r.numbers("s_grid");
  if (r.has("band_widths")) c.band_widths = r.numbers("band_widths");
  if (r.has("thresholds")) c.thresholds = r.numbers("thresholds");
  if (r.has("floor_levels")) c.floor_levels = r.numbers("floor_levels");
  if (r.has("samples")) c.samples = static_cast<std::size_t>(r.unsigned_integer("samples"));
  if (r.has("seed")) c.seed = r.unsigned_integer("seed");
  c.emulation_tolerance = r.number_or("emulation_tolerance", c.emulation_tolerance);
  c.floor_tolerance = r.number_or("floor_tolerance", c.floor_tolerance);
  r.finish();
  return c;
}

ConvergeChecks read_checks(Reader r) {
  ConvergeChecks c;
  c.final_ks_max = r.optional_number("final_ks_max");
  c.final_min_phi_prob = r.optional_number("final_min_phi_prob");
  c.monotone_sigmas = r.optional_number("monotone_sigmas");
  r.finish();
  return c;
}

DiagnosticsConfig read_diagnostics(Reader r) {
  DiagnosticsConfig c;
  c.eta = r.number_or("eta", c.eta);
  if (r.has("certify")) c.certify = read_certify(r.child("certify"));
  if (r.has("checks")) c.checks = read_checks(r.child("checks"));
  r.finish();
  return c;
}

TrajectoryConfig read_trajectories(Reader r) {
  TrajectoryConfig c;
  if (r.has("count")) c.count = static_cast<std::size_t>(r.unsigned_integer("count"));
  if (r.has("dump")) c.dump = r.boolean("dump");
  if (r.has("stride")) c.stride = static_cast<std::size_t>(r.unsigned_integer("stride"));
  r.finish();
  return c;
}

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

ordered_json to_json(const DomainConfig& d) {
  ordered_json j;
  j["kind"] = d.kind;
  if (d.kind == "half_space") {
    j["dimension"] = d.dimension;
    j["axis"] = d.axis;
    j["offset"] = d.offset;
  } else if (d.kind == "ball") {
    j["center"] = d.center;
    j["radius"] = d.radius;
  } else if (d.kind == "ellipsoid") {
    j["center"] = d.center;
    j["semi_axes"] = d.semi_axes;
  } else {
    j["center"] = d.center;
    j["inner_radius"] = d.inner_radius;
    j["outer_radius"] = d.outer_radius;
  }
  if (d.tube_radius_hint) j["tube_radius_hint"] = *d.tube_radius_hint;
  return j;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["domain"] = to_json(c.domain);

  ordered_json coeff;
  coeff["kind"] = c.coefficients.kind;
  coeff["drift"] = c.coefficients.drift;
  if (c.coefficients.kind == "affine") coeff["drift_matrix"] = c.coefficients.drift_matrix;
  coeff["diffusion"] = c.coefficients.diffusion;
  coeff["sigma_perturbation"] = c.coefficients.sigma_perturbation;
  j["coefficients"] = coeff;

  ordered_json refl;
  refl["kind"] = c.reflection.kind;
  if (c.reflection.kind == "constant") refl["vector"] = c.reflection.vector;
  if (c.reflection.kind == "normal_tangent")
    refl["tangent_coefficient"] = c.reflection.tangent_coefficient;
  j["reflection"] = refl;

  ordered_json pen;
  pen["family"] = c.penalty.family;
  if (c.penalty.family == "scaled_bump") {
    pen["profile"] = c.penalty.profile;
    pen["a_exponent"] = c.penalty.a_exponent;
    pen["c_exponent"] = c.penalty.c_exponent;
  }
  if (c.penalty.family == "constant") pen["value"] = c.penalty.value;
  if (c.penalty.direction) pen["direction"] = *c.penalty.direction;
  pen["n_grid"] = c.penalty.n_grid;
  if (c.penalty.cutoff) pen["cutoff"] = *c.penalty.cutoff;
  j["penalty"] = pen;

  ordered_json integ;
  integ["initial_point"] = c.integrator.initial_point;
  integ["horizon"] = c.integrator.horizon;
  integ["dt"] = c.integrator.dt;
  integ["paths"] = c.integrator.paths;
  integ["master_seed"] = c.integrator.master_seed;
  if (c.integrator.stiffness_cap) integ["stiffness_cap"] = *c.integrator.stiffness_cap;
  ordered_json stop;
  stop["kind"] = c.integrator.stopping.kind;
  if (c.integrator.stopping.kind == "ball") {
    stop["center"] = c.integrator.stopping.center;
    stop["radius"] = c.integrator.stopping.radius;
  }
  if (c.integrator.stopping.kind == "band") stop["depth"] = c.integrator.stopping.depth;
  integ["stopping"] = stop;
  integ["record_stride"] = c.integrator.record_stride;
  j["integrator"] = integ;

  ordered_json ref;
  ref["kind"] = c.reference.kind;
  if (c.reference.dt) ref["dt"] = *c.reference.dt;
  if (c.reference.paths) ref["paths"] = *c.reference.paths;
  if (c.reference.master_seed) ref["master_seed"] = *c.reference.master_seed;
  j["reference"] = ref;

  ordered_json cert;
  const auto& cc = c.diagnostics.certify;
  cert["epsilons"] = cc.epsilons;
  cert["s_grid"] = cc.s_grid;
  cert["band_widths"] = cc.band_widths;
  cert["thresholds"] = cc.thresholds;
  cert["floor_levels"] = cc.floor_levels;
  cert["samples"] = cc.samples;
  cert["seed"] = cc.seed;
  cert["emulation_tolerance"] = cc.emulation_tolerance;
  cert["floor_tolerance"] = cc.floor_tolerance;
  ordered_json checks = ordered_json::object();
  if (c.diagnostics.checks.final_ks_max) checks["final_ks_max"] = *c.diagnostics.checks.final_ks_max;
  if (c.diagnostics.checks.final_min_phi_prob)
    checks["final_min_phi_prob"] = *c.diagnostics.checks.final_min_phi_prob;
  if (c.diagnostics.checks.monotone_sigmas)
    checks["monotone_sigmas"] = *c.diagnostics.checks.monotone_sigmas;
  ordered_json diag;
  diag["eta"] = c.diagnostics.eta;
  diag["certify"] = cert;
  diag["checks"] = checks;
  j["diagnostics"] = diag;

  ordered_json traj;
  traj["count"] = c.trajectories.count;
  traj["dump"] = c.trajectories.dump;
  traj["stride"] = c.trajectories.stride;
  j["trajectories"] = traj;

  if (c.output_directory) j["output_directory"] = *c.output_directory;
  return j;
}

int byte_to_line(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

void validate_impl(const ExperimentConfig& c, const std::string* text);

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(byte_to_line(text, e.byte), e.what());
  }
  ExperimentConfig c;
  Reader r(root, {}, text);
  c.domain = read_domain(r.child("domain"));
  c.coefficients = read_coefficients(r.child("coefficients"));
  c.reflection = read_reflection(r.child("reflection"));
  c.penalty = read_penalty(r.child("penalty"));
  c.integrator = read_integrator(r.child("integrator"));
  if (r.has("reference")) c.reference = read_reference(r.child("reference"));
  if (r.has("diagnostics")) c.diagnostics = read_diagnostics(r.child("diagnostics"));
  if (r.has("trajectories")) c.trajectories = read_trajectories(r.child("trajectories"));
  if (r.has("output_directory")) c.output_directory = r.string("output_directory");
  r.finish();

  validate_impl(c, &text);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(e.line(), path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

//---------------------------------------------------------------------------//
// Object construction
//---------------------------------------------------------------------------//

namespace {

Vector to_vector(const std::vector<double>& v) {
  if (v.size() > static_cast<std::size_t>(kMaxDim)) throw InvalidArgument("vector too long");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, int dim) {
  if (rows.size() != static_cast<std::size_t>(dim)) throw DimensionMismatch("matrix has wrong row count");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(dim))
      throw DimensionMismatch("matrix has wrong column count");
    for (int j = 0; j < dim; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

Domain make_domain(const DomainConfig& d) {
  if (d.kind == "half_space") return Domain::half_space(d.dimension, d.axis, d.offset, d.tube_radius_hint);
  if (d.kind == "ball") return Domain::ball(to_vector(d.center), d.radius, d.tube_radius_hint);
  if (d.kind == "ellipsoid")
    return Domain::ellipsoid(to_vector(d.center), to_vector(d.semi_axes), d.tube_radius_hint);
  if (d.kind == "annulus")
    return Domain::annulus(to_vector(d.center), d.inner_radius, d.outer_radius, d.tube_radius_hint);
  throw InvalidArgument("unknown domain kind '" + d.kind + "'");
}

CoefficientField make_coefficients(const CoefficientConfig& c, int dim) {
  const Vector drift = to_vector(c.drift);
  if (drift.size() != dim) throw DimensionMismatch("drift has wrong dimension");
  const Matrix sigma = to_matrix(c.diffusion, dim);
  if (c.kind == "constant") return CoefficientField::constant(drift, sigma);
  return CoefficientField::affine(drift, to_matrix(c.drift_matrix, dim), sigma);
}

ReflectionField make_reflection(const ReflectionConfig& c, const Domain& domain) {
  if (c.kind == "constant") {
    const Vector v = to_vector(c.vector);
    if (v.size() != domain.dimension()) throw DimensionMismatch("reflection vector has wrong dimension");
    return normalize_reflection(ReflectionField::constant_raw(v), domain);
  }
  if (c.kind == "normal_tangent") {
    if (domain.dimension() != 2) throw DimensionMismatch("normal_tangent reflection is two-dimensional");
    return normalize_reflection(ReflectionField::normal_tangent_raw(c.tangent_coefficient), domain);
  }
  return normalize_reflection(ReflectionField::normal_raw(), domain);
}

PenaltySchedule make_schedule(const PenaltyConfig& p, int n) {
  if (p.family == "exponential") return PenaltySchedule::exponential(n);
  if (p.family == "projection") return PenaltySchedule::projection(n);
  if (p.family == "constant") return PenaltySchedule::constant(p.value, n);
  if (p.family == "scaled_bump")
    return PenaltySchedule::scaled_bump(parse_bump_profile(p.profile), p.a_exponent, p.c_exponent, n);
  throw InvalidArgument("penalty family '" + p.family + "' has no schedule");
}

std::optional<PenaltyField> make_penalty(const ExperimentConfig& c, const Domain& domain, int n) {
  if (c.penalty.family == "none") return std::nullopt;
  PenaltyDirection direction =
      c.penalty.family == "projection" ? PenaltyDirection::inward_normal : PenaltyDirection::reflection;
  if (c.penalty.direction) {
    if (*c.penalty.direction == "reflection") {
      direction = PenaltyDirection::reflection;
    } else if (*c.penalty.direction == "inward_normal") {
      direction = PenaltyDirection::inward_normal;
    } else {
      throw InvalidArgument("penalty direction must be 'reflection' or 'inward_normal'");
    }
  }
  return PenaltyField(make_schedule(c.penalty, n), make_reflection(c.reflection, domain), direction,
                      c.penalty.cutoff);
}

ModelSpec make_model_spec(const ExperimentConfig& c, int n) {
  const Domain domain = make_domain(c.domain);
  const int dim = domain.dimension();
  StoppingRegion stop = StoppingRegion::everywhere();
  if (c.integrator.stopping.kind == "ball") {
    stop = StoppingRegion::ball(to_vector(c.integrator.stopping.center), c.integrator.stopping.radius);
  } else if (c.integrator.stopping.kind == "band") {
    stop = StoppingRegion::band(c.integrator.stopping.depth);
  }
  ModelSpec spec{domain,
                 make_coefficients(c.coefficients, dim),
                 make_penalty(c, domain, n),
                 to_vector(c.integrator.initial_point),
                 c.integrator.horizon,
                 c.integrator.dt,
                 stop,
                 c.coefficients.sigma_perturbation,
                 c.integrator.stiffness_cap,
                 c.integrator.record_stride};
  return spec;
}

ReferenceSpec make_reference_spec(const ExperimentConfig& c) {
  const Domain domain = make_domain(c.domain);
  return ReferenceSpec{domain, make_coefficients(c.coefficients, domain.dimension()),
                       to_vector(c.integrator.initial_point), c.integrator.horizon,
                       c.reference.dt.value_or(c.integrator.dt), c.integrator.record_stride};
}

//---------------------------------------------------------------------------//
// Validation
//---------------------------------------------------------------------------//

namespace {

void validate_impl(const ExperimentConfig& c, const std::string* text) {
  // Each stage reports at the line of the section it came from.
  auto guard = [&](const std::string& section, const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      const KeyPath path = key.empty() ? KeyPath{section} : KeyPath{section, key};
      throw ConfigError(text ? line_of(*text, path) : 0, join(path) + ": " + e.what());
    }
  };

  std::optional<Domain> domain;
  guard("domain", "", [&] { domain = make_domain(c.domain); });
  const int dim = domain->dimension();
  guard("coefficients", "", [&] { make_coefficients(c.coefficients, dim); });
  guard("coefficients", "sigma_perturbation", [&] {
    if (!(c.coefficients.sigma_perturbation >= 0.0))
      throw InvalidArgument("must be nonnegative");
  });
  guard("reflection", "", [&] {
    const ReflectionField r = make_reflection(c.reflection, *domain);
    // Probe transversality at a boundary sample.
    RandomStream rng(1);
    for (int i = 0; i < 16; ++i) r.at_footprint(domain->footprint(domain->sample_boundary(rng)));
  });
  guard("penalty", "n_grid", [&] {
    if (c.penalty.n_grid.empty()) throw InvalidArgument("must not be empty");
    for (std::size_t i = 0; i < c.penalty.n_grid.size(); ++i) {
      if (c.penalty.n_grid[i] < 1) throw InvalidArgument("entries must be positive");
      if (i > 0 && c.penalty.n_grid[i] <= c.penalty.n_grid[i - 1])
        throw InvalidArgument("must be strictly increasing");
    }
  });
  guard("penalty", "", [&] {
    if (c.penalty.family != "none") make_penalty(c, *domain, c.penalty.n_grid.front());
  });
  guard("integrator", "paths", [&] {
    if (c.integrator.paths < 1) throw InvalidArgument("path count must be at least 1");
  });
  guard("integrator", "", [&] { make_model_spec(c, c.penalty.n_grid.front()).validate(); });
  guard("reference", "", [&] {
    if (c.reference.kind == "none") return;
    if (c.reference.paths && *c.reference.paths < 1) throw InvalidArgument("path count must be at least 1");
    if (c.reference.dt && !(*c.reference.dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (c.reference.kind == "skorokhod_halfspace") {
      if (c.domain.kind != "half_space")
        throw InvalidArgument("skorokhod_halfspace reference needs a half-space domain");
      if (c.coefficients.kind != "constant")
        throw InvalidArgument("skorokhod_halfspace reference needs constant coefficients");
      if (c.reflection.kind == "normal_tangent")
        throw InvalidArgument("skorokhod_halfspace reference needs a constant reflection vector");
    } else if (c.reflection.kind != "normal") {
      throw InvalidArgument(
          "projection reference emulates normal reflection only; an oblique field on this domain "
          "has no exact reference");
    }
    make_reference_spec(c).validate();
  });
  guard("diagnostics", "eta", [&] {
    if (!(c.diagnostics.eta > 0.0)) throw InvalidArgument("must be positive");
  });
  guard("diagnostics", "certify", [&] {
    const auto& cc = c.diagnostics.certify;
    for (double e : cc.epsilons)
      if (!(e > 0.0)) throw InvalidArgument("epsilons must be positive");
    for (double s : cc.s_grid)
      if (!(s > 0.0)) throw InvalidArgument("s_grid must lie in (0, inf)");
    for (double b : cc.band_widths)
      if (!(b > 0.0) || !(b < domain->tube_radius())) throw InvalidArgument("band widths must lie in (0, tube_radius)");
    for (double t : cc.thresholds)
      if (!(t > 0.0)) throw InvalidArgument("thresholds must be positive");
    if (cc.samples < 1) throw InvalidArgument("samples must be at least 1");
  });
  guard("trajectories", "stride", [&] {
    if (c.trajectories.stride < 1) throw InvalidArgument("must be at least 1");
  });
}

}  // namespace

void validate_config(const ExperimentConfig& c) { validate_impl(c, nullptr); }

}  // namespace penref
