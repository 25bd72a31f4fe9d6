#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "momentsieve/atomic.hpp"
#include "momentsieve/density.hpp"
#include "momentsieve/gaussian.hpp"
#include "momentsieve/momentgen.hpp"
#include "momentsieve/shape.hpp"

namespace momentsieve {
namespace cli {

namespace {

using json = nlohmann::ordered_json;

/// Bad flags, unreadable files, malformed or invalid JSON: exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kFamilies = {"atoms",          "gaussian1d",        "gaussian-nd",
                                            "power-gaussian", "mixture-equal-var", "mixture-two",
                                            "polytope",       "boxes",             "density-exponent"};

constexpr double kReproductionTol = 1e-6;

struct Job {
  std::string command;
  std::string family;
  std::string in, out, support;
  std::optional<double> kernel_tol, fit_tol;
  std::optional<int> k, shape_d, directions;
  std::uint64_t seed = 1;
  std::optional<json> support_json;  ///< Loaded from --support, or set by roundtrip.
};

std::shared_ptr<spdlog::logger> logger() {
  auto log = spdlog::get("momentsieve");
  if (!log) {
    log = spdlog::stderr_logger_mt("momentsieve");
    log->set_pattern("[%l] %v");
  }
  return log;
}

void configure_logging() {
  const char* env = std::getenv("MOMENTSIEVE_LOG");
  const std::string v = env ? env : "quiet";
  auto log = logger();
  if (v == "quiet") log->set_level(spdlog::level::off);
  else if (v == "info") log->set_level(spdlog::level::info);
  else if (v == "debug") log->set_level(spdlog::level::debug);
  else throw UsageError("MOMENTSIEVE_LOG must be quiet, info or debug, got '" + v + "'");
}

// ---------------------------------------------------------------- JSON plumbing

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw UsageError("malformed JSON in " + where + " at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
}

json load_json(const std::string& path) { return parse_json(read_text(path), path); }

void write_json(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
  if (!f) throw UsageError("cannot write " + path);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError(where + ": unknown field '" + key + "'");
  }
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw UsageError(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw UsageError(where + ": expected a number");
  return v.get<double>();
}

double number(const json& j, const char* key, const std::string& where) {
  return number(field(j, key, where), where + "." + key);
}

int integer(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) throw UsageError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw UsageError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Vector vector_of(const json& v, const std::string& where) {
  const auto x = numbers(v, where);
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

MultiPolynomial polynomial_of(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array()) throw UsageError(where + ": expected an array of terms");
  MultiPolynomial p(n);
  for (std::size_t t = 0; t < v.size(); ++t) {
    const std::string w = where + "[" + std::to_string(t) + "]";
    check_keys(v[t], {"alpha", "coef"}, w);
    const json& a = field(v[t], "alpha", w);
    if (!a.is_array() || a.size() != n) throw UsageError(w + ".alpha: expected " + std::to_string(n) + " entries");
    std::vector<int> e;
    for (const auto& x : a) {
      if (!x.is_number_integer() || x.get<int>() < 0) throw UsageError(w + ".alpha: expected non-negative integers");
      e.push_back(x.get<int>());
    }
    p.add_term(MultiIndex(e), number(v[t], "coef", w));
  }
  return p;
}

json to_json(const MultiPolynomial& p) {
  json out = json::array();
  for (const auto& [a, c] : p.terms()) out.push_back({{"alpha", a.entries()}, {"coef", c}});
  return out;
}

// ---------------------------------------------------------------- moment files

MomentSequence moments_of(const json& j, const std::string& where) {
  check_keys(j, {"dim", "degree", "order", "values"}, where);
  const int n = integer(j, "dim", where), d = integer(j, "degree", where);
  if (n < 1) throw UsageError(where + ": dim must be >= 1");
  if (d < 0) throw UsageError(where + ": degree must be >= 0");
  const json& order = field(j, "order", where);
  if (order != "graded-lex") throw UsageError(where + ": order must be \"graded-lex\"");
  auto values = numbers(field(j, "values", where), where + ".values");
  const std::size_t expect = graded_count(static_cast<std::size_t>(n), d);
  if (values.size() != expect)
    throw UsageError(where + ": expected " + std::to_string(expect) + " values for dim " + std::to_string(n) +
                     " and degree " + std::to_string(d) + ", got " + std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw UsageError(where + ": non-finite moment");
  return MomentSequence(static_cast<std::size_t>(n), d, std::move(values));
}

json to_json(const MomentSequence& s) {
  return {{"dim", s.dim()}, {"degree", s.degree()}, {"order", "graded-lex"}, {"values", s.values()}};
}

// ---------------------------------------------------------------- model files

void check_convention(const json& m, const std::string& where) {
  const json& c = field(m, "convention", where);
  if (c != gauss::kConvention)
    throw UsageError(where + ": convention must be \"" + std::string(gauss::kConvention) + "\"");
}

std::vector<Vector> points_of(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array()) throw UsageError(where + ": expected an array of points");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(vector_of(v[i], where + "[" + std::to_string(i) + "]"));
    if (static_cast<std::size_t>(out.back().size()) != n)
      throw UsageError(where + ": every point needs " + std::to_string(n) + " coordinates");
  }
  return out;
}

double polygon_area(const std::vector<Vector>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vector& u = p[i];
    const Vector& v = p[(i + 1) % p.size()];
    a += u(0) * v(1) - u(1) * v(0);
  }
  return 0.5 * a;
}

std::vector<gen::Box> boxes_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw UsageError(where + ": expected a non-empty array of boxes");
  std::vector<gen::Box> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(v[i], {"lower", "upper", "coef"}, w);
    gen::Box b{vector_of(field(v[i], "lower", w), w + ".lower"), vector_of(field(v[i], "upper", w), w + ".upper"),
               number(v[i], "coef", w)};
    if (b.lower.size() == 0 || b.lower.size() != b.upper.size() ||
        (!out.empty() && b.lower.size() != out.front().lower.size()))
      throw UsageError(w + ": inconsistent box dimension");
    if (!((b.upper - b.lower).minCoeff() > 0.0)) throw UsageError(w + ": need lower < upper");
    out.push_back(b);
  }
  return out;
}

json to_json(const std::vector<gen::Box>& boxes) {
  json out = json::array();
  for (const auto& b : boxes) out.push_back({{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}, {"coef", b.coef}});
  return out;
}

/// Moments of a model file at the given degree. Validates every field.
MomentSequence model_moments(const std::string& family, const json& m, int degree) {
  const std::string w = "model";
  if (m.is_object() && m.contains("family") && m.at("family") != family)
    throw UsageError(w + ": family field does not match --family " + family);
  if (family == "atoms") {
    check_keys(m, {"family", "degree", "positions", "weights"}, w);
    const auto x = numbers(field(m, "positions", w), w + ".positions");
    const auto c = numbers(field(m, "weights", w), w + ".weights");
    return gen::atomic_moments(x, c, degree);
  }
  if (family == "gaussian1d") {
    check_keys(m, {"family", "convention", "degree", "a", "b", "c"}, w);
    check_convention(m, w);
    return gauss::gaussian1d_moments(number(m, "a", w), number(m, "b", w), number(m, "c", w), degree);
  }
  if (family == "gaussian-nd") {
    check_keys(m, {"family", "convention", "degree", "A", "b", "c"}, w);
    check_convention(m, w);
    const Vector b = vector_of(field(m, "b", w), w + ".b");
    const auto rows = points_of(field(m, "A", w), static_cast<std::size_t>(b.size()), w + ".A");
    if (rows.size() != static_cast<std::size_t>(b.size()) || b.size() == 0)
      throw UsageError(w + ": A must be square and match b");
    Matrix A(b.size(), b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) A.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    if ((A - A.transpose()).norm() > 1e-12 * A.norm()) throw UsageError(w + ": A must be symmetric");
    return gen::gaussian_nd_moments({gauss::GaussianND{A, b, number(m, "c", w)}}, degree);
  }
  if (family == "power-gaussian") {
    check_keys(m, {"family", "convention", "degree", "a", "b", "c", "d"}, w);
    check_convention(m, w);
    return gauss::power_gaussian_moments({number(m, "a", w), number(m, "b", w), number(m, "c", w), integer(m, "d", w)},
                                         degree);
  }
  if (family == "mixture-equal-var") {
    check_keys(m, {"family", "convention", "degree", "a", "components"}, w);
    check_convention(m, w);
    const double a = number(m, "a", w);
    const json& comps = field(m, "components", w);
    if (!comps.is_array() || comps.empty()) throw UsageError(w + ".components: expected a non-empty array");
    std::vector<gauss::Gaussian1D> g;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string wi = w + ".components[" + std::to_string(i) + "]";
      check_keys(comps[i], {"b", "c"}, wi);
      g.push_back({a, number(comps[i], "b", wi), number(comps[i], "c", wi)});
    }
    return gauss::gaussian1d_mixture_moments(g, degree);
  }
  if (family == "mixture-two") {
    check_keys(m, {"family", "convention", "degree", "components"}, w);
    check_convention(m, w);
    const json& comps = field(m, "components", w);
    if (!comps.is_array() || comps.empty() || comps.size() > 2)
      throw UsageError(w + ".components: expected one or two components");
    std::vector<gauss::Gaussian1D> g;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string wi = w + ".components[" + std::to_string(i) + "]";
      check_keys(comps[i], {"a", "b", "c"}, wi);
      g.push_back({number(comps[i], "a", wi), number(comps[i], "b", wi), number(comps[i], "c", wi)});
    }
    return gauss::gaussian1d_mixture_moments(g, degree);
  }
  if (family == "polytope") {
    check_keys(m, {"family", "degree", "vertices", "coef"}, w);
    auto v = points_of(field(m, "vertices", w), 2, w + ".vertices");
    if (v.size() < 3) throw UsageError(w + ".vertices: a polygon needs at least 3 vertices");
    if (polygon_area(v) < 0.0) std::reverse(v.begin(), v.end());
    const double coef = m.contains("coef") ? number(m, "coef", w) : 1.0;
    const auto tri = gen::fan_triangulation(v);
    return gen::simplex_moments(tri, std::vector<double>(tri.size(), coef), degree);
  }
  if (family == "boxes") {
    check_keys(m, {"family", "degree", "boxes"}, w);
    return gen::box_moments(boxes_of(field(m, "boxes", w), w + ".boxes"), degree);
  }
  if (family == "density-exponent") {
    check_keys(m, {"family", "degree", "p", "lower", "upper"}, w);
    const Vector lo = vector_of(field(m, "lower", w), w + ".lower");
    const Vector hi = vector_of(field(m, "upper", w), w + ".upper");
    if (lo.size() == 0 || lo.size() != hi.size() || !((hi - lo).minCoeff() > 0.0))
      throw UsageError(w + ": need lower < upper of equal dimension");
    const auto p = polynomial_of(field(m, "p", w), static_cast<std::size_t>(lo.size()), w + ".p");
    return gen::density_moments(p, lo, hi, degree);
  }
  throw UsageError("unknown family " + family);
}

int model_degree(const json& m) {
  if (!m.is_object()) throw UsageError("model: expected an object");
  const int d = integer(m, "degree", "model");
  if (d < 0) throw UsageError("model.degree must be >= 0");
  return d;
}

// ---------------------------------------------------------------- fitting

struct Fitted {
  json model;
  json tolerances = json::object();
  json diagnostics = json::object();
  json rejected = json::array();
};

void require_dim(const MomentSequence& s, std::size_t n, const std::string& family) {
  if (s.dim() != n)
    throw Rejection("dimension mismatch", {family + " needs dim " + std::to_string(n) + ", got " +
                                               std::to_string(s.dim())});
}

gauss::FitOptions gauss_options(const Job& job, Fitted& out) {
  gauss::FitOptions o;
  if (job.kernel_tol) o.kernel_tol = *job.kernel_tol;
  if (job.fit_tol) o.fit_tol = o.membership_tol = *job.fit_tol;
  out.tolerances = {{"kernel_tol", o.kernel_tol},
                    {"membership_tol", o.membership_tol},
                    {"fit_tol", o.fit_tol},
                    {"sym_tol", o.sym_tol}};
  return o;
}

json gaussian_model(const char* family, int degree) {
  return {{"family", family}, {"convention", gauss::kConvention}, {"degree", degree}};
}

void fit_atoms(const Job& job, const MomentSequence& s, Fitted& out) {
  atomic::AtomicFitOptions o;
  if (job.fit_tol) o.fit_tol = *job.fit_tol;
  if (job.kernel_tol) o.rank_tol = *job.kernel_tol;
  out.tolerances = {{"fit_tol", o.fit_tol}, {"rank_tol", o.rank_tol}, {"merge_tol", o.merge_tol}};
  require_dim(s, 1, "atoms");
  const int kmax = job.k.value_or((s.degree() - 1) / 2);
  const auto f = atomic::recover_signed_atomic(s, kmax, o);
  if (!f.measure.is_real()) {
    std::vector<std::string> diag;
    for (const auto& a : f.measure.atoms) {
      std::ostringstream ss;
      ss.precision(10);
      ss << "atom at " << a.position.real() << (a.position.imag() < 0 ? "" : "+") << a.position.imag() << "i";
      diag.push_back(ss.str());
    }
    throw Rejection("non-real atoms", diag);
  }
  std::vector<std::pair<double, double>> atoms;
  const auto x = f.measure.real_positions();
  const auto c = f.measure.real_weights();
  for (std::size_t i = 0; i < x.size(); ++i) atoms.push_back({x[i], c[i]});
  std::sort(atoms.begin(), atoms.end());
  std::vector<double> px, pw;
  for (const auto& [p, q] : atoms) {
    px.push_back(p);
    pw.push_back(q);
  }
  out.model = {{"family", "atoms"}, {"degree", s.degree()}, {"positions", px}, {"weights", pw}};
  out.diagnostics = {{"k", f.k}, {"k_max", kmax}, {"residual", f.residual}, {"condition", f.condition}};
}

void fit_gaussian1d(const Job& job, const MomentSequence& s, Fitted& out) {
  const auto o = gauss_options(job, out);
  require_dim(s, 1, "gaussian1d");
  const auto f = gauss::fit_single_gaussian_1d(s, o);
  out.model = gaussian_model("gaussian1d", s.degree());
  out.model["a"] = f.g.a;
  out.model["b"] = f.g.b;
  out.model["c"] = f.g.c;
  out.diagnostics = {{"membership_residual", f.membership_residual}};
}

void fit_gaussian_nd(const Job& job, const MomentSequence& s, Fitted& out) {
  const auto o = gauss_options(job, out);
  const auto f = gauss::fit_single_gaussian_nd(s, o);
  out.model = gaussian_model("gaussian-nd", s.degree());
  out.model["A"] = to_json(f.g.A);
  out.model["b"] = to_json(f.g.b);
  out.model["c"] = f.g.c;
  out.diagnostics = {{"membership_residual", f.membership_residual}, {"asymmetry", f.asymmetry}};
}

void fit_power_gaussian(const Job& job, const MomentSequence& s, Fitted& out) {
  const auto o = gauss_options(job, out);
  require_dim(s, 1, "power-gaussian");
  const int d = job.shape_d.value_or(2);
  const auto f = gauss::fit_power_gaussian_1d(s, d, o);
  out.model = gaussian_model("power-gaussian", s.degree());
  out.model["a"] = f.g.a;
  out.model["b"] = f.g.b;
  out.model["c"] = f.g.c;
  out.model["d"] = f.g.d;
  out.diagnostics = {{"membership_residual", f.membership_residual},
                     {"pattern_residual", f.pattern_residual},
                     {"low_order_residual", f.low_order_residual}};
}

void fit_mixture_equal_var(const Job& job, const MomentSequence& s, Fitted& out) {
  gauss::MixtureOptions o;
  if (job.fit_tol) o.fit_tol = *job.fit_tol;
  if (job.kernel_tol) o.kernel_tol = *job.kernel_tol;
  out.tolerances = {{"fit_tol", o.fit_tol}, {"kernel_tol", o.kernel_tol}};
  require_dim(s, 1, "mixture-equal-var");
  const int k = job.k.value_or(2);
  const auto f = gauss::fit_mixture_equal_variance(s, k, o);
  out.model = gaussian_model("mixture-equal-var", s.degree());
  out.model["a"] = f.a;
  json comps = json::array();
  for (std::size_t i = 0; i < f.b.size(); ++i) comps.push_back({{"b", f.b[i]}, {"c", f.c[i]}});
  out.model["components"] = comps;
  for (const auto& c : f.candidates)
    if (!c.accepted) out.rejected.push_back({{"a", c.a}, {"reason", c.verdict}, {"residual", c.residual}});
  out.diagnostics = {{"k", k},
                     {"residual", f.residual},
                     {"variance_polynomial_standardised", f.variance_poly.coefficients()},
                     {"standardise_shift", f.standardise_shift},
                     {"standardise_scale", f.standardise_scale}};
}

void fit_mixture_two(const Job& job, const MomentSequence& s, Fitted& out) {
  gauss::TwoMixtureOptions o;
  if (job.fit_tol) o.fit_tol = *job.fit_tol;
  if (job.kernel_tol) o.kernel_tol = *job.kernel_tol;
  out.tolerances = {{"fit_tol", o.fit_tol}, {"kernel_tol", o.kernel_tol}, {"collapse_tol", o.collapse_tol}};
  require_dim(s, 1, "mixture-two");
  const auto f = gauss::fit_two_mixture_1d(s, o);
  out.model = gaussian_model("mixture-two", s.degree());
  json comps = json::array();
  for (const auto& g : f.components) comps.push_back({{"a", g.a}, {"b", g.b}, {"c", g.c}});
  out.model["components"] = comps;
  out.diagnostics = {{"route", f.route}, {"degenerate", f.degenerate}, {"residual", f.residual}, {"notes", f.diagnostics}};
}

json projections_json(const shape::Projections& p, int n) {
  return {{"positions", p.positions},
          {"weights", p.weights},
          {"residual", p.residual},
          {"condition", p.condition},
          {"low_order_defect", shape::low_order_defect(p, n)}};
}

void fit_polytope(const Job& job, const MomentSequence& s, Fitted& out) {
  shape::ShapeOptions o;
  if (job.fit_tol) o.fit_tol = *job.fit_tol;
  if (job.kernel_tol) o.rank_tol = *job.kernel_tol;
  out.tolerances = {{"fit_tol", o.fit_tol}, {"rank_tol", o.rank_tol}, {"match_tol", o.match_tol}};
  require_dim(s, 2, "polytope");
  const int count = job.directions.value_or(3);
  const int k = job.k.value_or((s.degree() - 3) / 2);
  const auto dirs = shape::random_directions(2, count, job.seed);
  json dj = json::array();
  for (const auto& r : dirs) dj.push_back(to_json(r));
  out.diagnostics = {{"k", k}, {"directions", dj}};
  const auto pm = shape::recover_polytope_vertices(s, k, dirs, o);
  json per = json::array();
  for (const auto& p : pm.per_direction) per.push_back(projections_json(p, 2));
  out.diagnostics["per_direction"] = per;
  out.diagnostics["max_match_error"] = pm.max_match_error;
  if (pm.vertices.size() < 3)
    throw Rejection("not a convex polygon", {std::to_string(pm.vertices.size()) + " matched vertices"});

  // Boundary order around the centroid; the coefficient follows from the mass.
  Vector ctr = Vector::Zero(2);
  for (const auto& v : pm.vertices) ctr += v;
  ctr /= static_cast<double>(pm.vertices.size());
  auto v = pm.vertices;
  std::sort(v.begin(), v.end(), [&](const Vector& p, const Vector& q) {
    return std::atan2(p(1) - ctr(1), p(0) - ctr(0)) < std::atan2(q(1) - ctr(1), q(0) - ctr(0));
  });
  const double area = polygon_area(v);
  json vj = json::array();
  for (const auto& p : v) vj.push_back(to_json(p));
  out.model = {{"family", "polytope"}, {"degree", s.degree()}, {"vertices", vj}, {"coef", s[0] / area}};
}

void fit_boxes(const Job& job, const MomentSequence& s, Fitted& out) {
  shape::BoxOptions o;
  if (job.fit_tol) o.fit_tol = *job.fit_tol;
  if (job.kernel_tol) o.shape.rank_tol = *job.kernel_tol;
  out.tolerances = {{"fit_tol", o.fit_tol},
                    {"rank_tol", o.shape.rank_tol},
                    {"atomic_fit_tol", o.shape.fit_tol},
                    {"vertex_tol", o.vertex_tol}};
  if (s.dim() < 2) throw Rejection("dimension mismatch", {"boxes needs dim >= 2, got 1"});
  const int k = job.k.value_or(std::max(1, (s.degree() - 1) / 4));
  out.diagnostics = {{"k", k}};
  const auto f = shape::recover_box_arrangement(s, k, o);
  out.model = {{"family", "boxes"}, {"degree", s.degree()}, {"boxes", to_json(f.boxes)}};
  out.diagnostics["grid"] = f.grid.coords;
  out.diagnostics["grid_notes"] = f.grid.notes;
  out.diagnostics["residual"] = f.residual;
  out.diagnostics["direction"] = to_json(f.direction);
  out.diagnostics["projection_checked"] = f.projection_checked;
  out.diagnostics["projection_error"] = f.projection_error;
}

density::SemiAlgebraicSpec support_of(const json& j, const std::string& where) {
  check_keys(j, {"g", "lower", "upper", "g_nonnegative"}, where);
  density::SemiAlgebraicSpec spec;
  const Vector lo = vector_of(field(j, "lower", where), where + ".lower");
  const Vector hi = vector_of(field(j, "upper", where), where + ".upper");
  if (lo.size() == 0 || lo.size() != hi.size() || !((hi - lo).minCoeff() > 0.0))
    throw UsageError(where + ": need lower < upper of equal dimension");
  spec.box_lower = lo;
  spec.box_upper = hi;
  spec.g = polynomial_of(field(j, "g", where), static_cast<std::size_t>(lo.size()), where + ".g");
  if (j.contains("g_nonnegative")) {
    if (!j.at("g_nonnegative").is_boolean()) throw UsageError(where + ".g_nonnegative: expected a boolean");
    spec.g_nonnegative = j.at("g_nonnegative").get<bool>();
  }
  return spec;
}

void fit_density(const Job& job, const MomentSequence& s, Fitted& out) {
  if (!job.support_json) throw UsageError("density-exponent needs --support");
  const auto spec = support_of(*job.support_json, "support");
  density::ExponentOptions o;
  if (job.kernel_tol) o.kernel_tol = *job.kernel_tol;
  if (job.fit_tol) o.cons_tol = *job.fit_tol;
  out.tolerances = {{"kernel_tol", o.kernel_tol}, {"cons_tol", o.cons_tol}};
  const int d = job.shape_d.value_or(2);
  const auto f = density::recover_exponent(s, spec, d, o);
  out.diagnostics = {{"d", d},
                     {"kernel_dims", f.kernel_dims},
                     {"singular_gaps", f.singular_gaps},
                     {"max_axis_disagreement", f.max_axis_disagreement},
                     {"notes", f.diagnostics}};
  const auto norm = density::normalize_constant(f.p, spec, s[0]);
  auto p = f.p;
  p.add_term(MultiIndex(s.dim()), norm.c0);
  out.diagnostics["normalization"] = {{"method", norm.method}, {"integral", norm.integral}};
  out.model = {{"family", "density-exponent"},
               {"degree", s.degree()},
               {"p", to_json(p)},
               {"lower", to_json(*spec.box_lower)},
               {"upper", to_json(*spec.box_upper)}};
}

void fit_family(const Job& job, const MomentSequence& s, Fitted& out) {
  const std::string& f = job.family;
  if (f == "atoms") fit_atoms(job, s, out);
  else if (f == "gaussian1d") fit_gaussian1d(job, s, out);
  else if (f == "gaussian-nd") fit_gaussian_nd(job, s, out);
  else if (f == "power-gaussian") fit_power_gaussian(job, s, out);
  else if (f == "mixture-equal-var") fit_mixture_equal_var(job, s, out);
  else if (f == "mixture-two") fit_mixture_two(job, s, out);
  else if (f == "polytope") fit_polytope(job, s, out);
  else if (f == "boxes") fit_boxes(job, s, out);
  else fit_density(job, s, out);
}

/// Max deviation after rescaling s_alpha by s_0 rho^|alpha|, rho the growth rate of s.
double scaled_error(const MomentSequence& s, const MomentSequence& r) {
  const double s0 = std::abs(s[0]) > 0.0 ? std::abs(s[0]) : 1.0;
  double rho = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int j = s.indices()[i].order();
    if (j > 0) rho = std::max(rho, std::pow(std::abs(s[i]) / s0, 1.0 / j));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = 1.0 / (s0 * std::pow(rho, s.indices()[i].order()));
    num = std::max(num, std::abs(s[i] - r[i]) * w);
    den = std::max(den, std::abs(s[i]) * w);
  }
  return den > 0.0 ? num / den : num;
}

/// Runs the fit and the reproduction check; returns the report and sets the exit code.
json fit_report(const Job& job, const MomentSequence& s, int& code) {
  json report = {{"command", "fit"}, {"family", job.family}, {"input", {{"dim", s.dim()}, {"degree", s.degree()}}}};
  Fitted out;
  const double repro_tol = std::max(kReproductionTol, job.fit_tol.value_or(0.0));
  try {
    fit_family(job, s, out);
    const double err = scaled_error(s, model_moments(job.family, out.model, s.degree()));
    out.diagnostics["reproduction_error"] = err;
    if (!(err <= repro_tol)) {
      out.rejected.push_back({{"model", out.model}, {"reason", "fitted model does not reproduce the moments"}});
      char buf[96];
      std::snprintf(buf, sizeof buf, "scaled reproduction error %.3e above %.1e", err, repro_tol);
      throw Rejection("fitted model does not reproduce the moments", {buf});
    }
    out.tolerances["reproduction_tol"] = repro_tol;
    report["status"] = "accepted";
    report["tolerances"] = out.tolerances;
    report["model"] = out.model;
    report["diagnostics"] = out.diagnostics;
    report["rejected_candidates"] = out.rejected;
    code = 0;
    logger()->info("fit {}: accepted", job.family);
  } catch (const Rejection& r) {
    out.tolerances["reproduction_tol"] = repro_tol;
    report["status"] = "rejected";
    report["reason"] = r.reason();
    report["details"] = r.diagnostics();
    report["tolerances"] = out.tolerances;
    report["diagnostics"] = out.diagnostics;
    report["rejected_candidates"] = out.rejected;
    code = 2;
    logger()->info("fit {}: rejected ({})", job.family, r.reason());
  }
  return report;
}

// ---------------------------------------------------------------- round trip

std::vector<double> separated(std::mt19937_64& rng, int k, double lo, double hi, double gap) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    std::vector<double> x(k);
    for (auto& v : x) v = u(rng);
    std::sort(x.begin(), x.end());
    bool ok = true;
    for (int i = 1; i < k; ++i) ok = ok && x[i] - x[i - 1] >= gap;
    if (ok) return x;
  }
}

/// Seeded true model for the family, plus the support file density fits need.
json random_model(Job& job) {
  std::mt19937_64 rng(job.seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto sign = [&] { return std::bernoulli_distribution(0.5)(rng) ? -1.0 : 1.0; };
  const std::string& f = job.family;
  if (f == "atoms") {
    const int k = job.k.value_or(3);
    const auto x = separated(rng, k, -2.0, 2.0, 0.3);
    std::vector<double> w;
    for (int i = 0; i < k; ++i) w.push_back(sign() * U(0.5, 2.0));
    return {{"family", f}, {"degree", 2 * k + 3}, {"positions", x}, {"weights", w}};
  }
  if (f == "gaussian1d") {
    json m = gaussian_model("gaussian1d", 6);
    m["a"] = U(0.2, 5.0);
    m["b"] = U(-3.0, 3.0);
    m["c"] = U(0.1, 10.0);
    return m;
  }
  if (f == "gaussian-nd") {
    Matrix B(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) B(i) = U(-1.0, 1.0);
    const Matrix A = B * B.transpose() + 0.5 * Matrix::Identity(2, 2);
    json m = gaussian_model("gaussian-nd", 6);
    m["A"] = to_json(A);
    m["b"] = {U(-1.0, 1.0), U(-1.0, 1.0)};
    m["c"] = U(0.5, 2.0);
    return m;
  }
  if (f == "power-gaussian") {
    const int d = job.shape_d.value_or(2);
    json m = gaussian_model("power-gaussian", 4 * d + 2);
    m["a"] = U(0.5, 3.0);
    m["b"] = U(-1.0, 1.0);
    m["c"] = U(0.5, 2.0);
    m["d"] = d;
    return m;
  }
  if (f == "mixture-equal-var") {
    const int k = job.k.value_or(2);
    json m = gaussian_model("mixture-equal-var", 2 * k + 2);
    m["a"] = U(0.5, 4.0);
    json comps = json::array();
    for (double b : separated(rng, k, -3.0, 3.0, 0.8)) comps.push_back({{"b", b}, {"c", U(0.5, 2.0)}});
    m["components"] = comps;
    return m;
  }
  if (f == "mixture-two") {
    json m = gaussian_model("mixture-two", 10);
    const double b1 = U(-0.5, 0.5);
    m["components"] = {{{"a", U(0.8, 1.2)}, {"b", b1}, {"c", U(0.8, 1.2)}},
                       {{"a", U(3.0, 5.0)}, {"b", b1 + U(0.8, 1.5)}, {"c", U(0.8, 1.2)}}};
    return m;
  }
  if (f == "polytope") {
    const int k = job.k.value_or(5);
    json vj = json::array();
    for (const auto& v : gen::random_convex_polygon(k, job.seed)) vj.push_back(to_json(v));
    return {{"family", f}, {"degree", 2 * k + 3}, {"vertices", vj}, {"coef", 1.0}};
  }
  if (f == "boxes") {
    const int k = job.k.value_or(2);
    return {{"family", f}, {"degree", 4 * k + 1}, {"boxes", to_json(gen::random_box_arrangement(2, k, -3.0, 3.0, 0.2, job.seed))}};
  }
  // density-exponent on the square with g = (1 - x^2)(1 - y^2).
  MultiPolynomial p(2);
  p.add_term(MultiIndex{1, 0}, U(-0.5, 0.5));
  p.add_term(MultiIndex{0, 1}, U(-0.5, 0.5));
  p.add_term(MultiIndex{2, 0}, U(-1.0, 0.2));
  p.add_term(MultiIndex{1, 1}, U(-0.3, 0.3));
  p.add_term(MultiIndex{0, 2}, U(-1.0, 0.2));
  const auto x = MultiPolynomial::variable(2, 0), y = MultiPolynomial::variable(2, 1);
  const auto one = MultiPolynomial::constant(2, 1.0);
  job.support_json = json{{"g", to_json((one - x * x) * (one - y * y))}, {"lower", {-1.0, -1.0}}, {"upper", {1.0, 1.0}}};
  return {{"family", f}, {"degree", 10}, {"p", to_json(p)}, {"lower", {-1.0, -1.0}}, {"upper", {1.0, 1.0}}};
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

struct Comparison {
  json errors = json::object();
  double max_error = 0.0;
  void add(const char* name, double e) {
    errors[name] = e;
    max_error = std::max(max_error, e);
  }
};

std::vector<Vector> point_list(const json& v) {
  std::vector<Vector> out;
  for (const auto& p : v) out.push_back(vector_of(p, "point"));
  return out;
}

/// Largest distance from a point of `a` to its nearest point of `b`, both ways.
double hausdorff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return INFINITY;
  double e = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& u = pass ? b : a;
    const auto& v = pass ? a : b;
    for (const auto& p : u) {
      double best = INFINITY;
      for (const auto& q : v) best = std::min(best, (p - q).norm());
      e = std::max(e, best);
    }
  }
  return e;
}

Comparison compare_models(const std::string& f, const json& t, const json& m) {
  Comparison c;
  auto size_mismatch = [&](std::size_t a, std::size_t b) {
    if (a == b) return false;
    c.add("count", INFINITY);
    return true;
  };
  if (f == "atoms") {
    const auto tx = numbers(t["positions"], "true"), mx = numbers(m["positions"], "fit");
    const auto tw = numbers(t["weights"], "true"), mw = numbers(m["weights"], "fit");
    if (size_mismatch(tx.size(), mx.size())) return c;
    std::vector<std::size_t> order(tx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return tx[i] < tx[j]; });
    double ex = 0.0, ew = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      ex = std::max(ex, rel(mx[i], tx[order[i]]));
      ew = std::max(ew, rel(mw[i], tw[order[i]]));
    }
    c.add("position", ex);
    c.add("weight", ew);
  } else if (f == "gaussian1d" || f == "power-gaussian") {
    c.add("a", rel(m["a"].get<double>(), t["a"].get<double>()));
    c.add("b", rel(m["b"].get<double>(), t["b"].get<double>()));
    c.add("c", rel(m["c"].get<double>(), t["c"].get<double>()));
  } else if (f == "gaussian-nd") {
    const auto ta = point_list(t["A"]), ma = point_list(m["A"]);
    double ea = 0.0, na = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      ea = std::max(ea, (ta[i] - ma[i]).cwiseAbs().maxCoeff());
      na = std::max(na, ta[i].cwiseAbs().maxCoeff());
    }
    c.add("A", ea / na);
    c.add("b", (vector_of(t["b"], "b") - vector_of(m["b"], "b")).cwiseAbs().maxCoeff());
    c.add("c", rel(m["c"].get<double>(), t["c"].get<double>()));
  } else if (f == "mixture-equal-var" || f == "mixture-two") {
    const json& tc = t["components"];
    const json& mc = m["components"];
    if (size_mismatch(tc.size(), mc.size())) return c;
    auto key = f == "mixture-two" ? "a" : "b";
    std::vector<json> ts(tc.begin(), tc.end()), ms(mc.begin(), mc.end());
    auto by = [&](const json& p, const json& q) { return p[key].get<double>() < q[key].get<double>(); };
    std::sort(ts.begin(), ts.end(), by);
    std::sort(ms.begin(), ms.end(), by);
    double ea = 0.0, eb = 0.0, ec = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double ta = f == "mixture-two" ? ts[i]["a"].get<double>() : t["a"].get<double>();
      const double ma = f == "mixture-two" ? ms[i]["a"].get<double>() : m["a"].get<double>();
      ea = std::max(ea, rel(ma, ta));
      eb = std::max(eb, rel(ms[i]["b"].get<double>(), ts[i]["b"].get<double>()));
      ec = std::max(ec, rel(ms[i]["c"].get<double>(), ts[i]["c"].get<double>()));
    }
    c.add("a", ea);
    c.add("b", eb);
    c.add("c", ec);
  } else if (f == "polytope") {
    c.add("max_vertex_error", hausdorff(point_list(t["vertices"]), point_list(m["vertices"])));
  } else if (f == "boxes") {
    auto tb = boxes_of(t["boxes"], "true"), mb = boxes_of(m["boxes"], "fit");
    if (size_mismatch(tb.size(), mb.size())) return c;
    auto lex = [](const gen::Box& p, const gen::Box& q) {
      return std::lexicographical_compare(p.lower.data(), p.lower.data() + p.lower.size(), q.lower.data(),
                                          q.lower.data() + q.lower.size());
    };
    std::sort(tb.begin(), tb.end(), lex);
    std::sort(mb.begin(), mb.end(), lex);
    double ev = 0.0, ec = 0.0;
    for (std::size_t i = 0; i < tb.size(); ++i) {
      ev = std::max({ev, (tb[i].lower - mb[i].lower).cwiseAbs().maxCoeff(),
                     (tb[i].upper - mb[i].upper).cwiseAbs().maxCoeff()});
      ec = std::max(ec, rel(mb[i].coef, tb[i].coef));
    }
    c.add("max_vertex_error", ev);
    c.add("max_coef_error", ec);
  } else {
    const auto tp = polynomial_of(t["p"], 2, "true"), mp = polynomial_of(m["p"], 2, "fit");
    double e = 0.0;
    for (const auto& a : graded_indices(2, 2))
      if (a.order() > 0) e = std::max(e, std::abs(tp.coef(a) - mp.coef(a)));
    c.add("max_coef_error", e);
  }
  return c;
}

double roundtrip_tolerance(const std::string& f) {
  if (f == "atoms" || f == "gaussian1d") return 1e-8;
  if (f == "mixture-equal-var") return 1e-4;
  if (f == "mixture-two") return 1e-5;
  return 1e-6;
}

json roundtrip_report(Job& job, int& code) {
  const json truth = random_model(job);
  const auto s = model_moments(job.family, truth, model_degree(truth));
  json fit = fit_report(job, s, code);
  json report = {{"command", "roundtrip"}, {"family", job.family}, {"seed", job.seed}, {"true_model", truth}};
  report["fit"] = fit;
  if (code != 0) {
    report["status"] = "rejected";
    return report;
  }
  const auto cmp = compare_models(job.family, truth, fit["model"]);
  const double tol = roundtrip_tolerance(job.family);
  report["errors"] = cmp.errors;
  report["max_parameter_error"] = cmp.max_error;
  report["parameter_tolerance"] = tol;
  if (cmp.errors.contains("max_vertex_error")) report["max-vertex-error"] = cmp.errors["max_vertex_error"];
  const bool ok = cmp.max_error <= tol;
  report["status"] = ok ? "passed" : "failed";
  code = ok ? 0 : 2;
  return report;
}

// ---------------------------------------------------------------- entry

void check_tolerance(const std::optional<double>& t, const char* name) {
  if (t && !(*t > 0.0 && *t < 1.0)) throw UsageError(std::string(name) + " must lie in (0,1)");
}

int execute(Job& job) {
  if (std::find(kFamilies.begin(), kFamilies.end(), job.family) == kFamilies.end())
    throw UsageError("unknown family '" + job.family + "'");
  check_tolerance(job.kernel_tol, "--kernel-tol");
  check_tolerance(job.fit_tol, "--fit-tol");
  if (job.k && *job.k < 1) throw UsageError("--k must be >= 1");
  if (job.shape_d && *job.shape_d < 1) throw UsageError("--shape-d must be >= 1");
  if (job.directions && *job.directions < 3) throw UsageError("--directions must be >= 3");
  if (!job.support.empty()) job.support_json = load_json(job.support);

  int code = 0;
  if (job.command == "generate") {
    if (job.in.empty()) throw UsageError("generate needs --in");
    const json m = load_json(job.in);
    const auto s = model_moments(job.family, m, model_degree(m));
    logger()->info("generate {}: dim {} degree {}", job.family, s.dim(), s.degree());
    write_json(to_json(s), job.out);
  } else if (job.command == "fit") {
    if (job.in.empty()) throw UsageError("fit needs --in");
    const auto s = moments_of(load_json(job.in), job.in);
    logger()->debug("fit {}: dim {} degree {}", job.family, s.dim(), s.degree());
    write_json(fit_report(job, s, code), job.out);
  } else {
    write_json(roundtrip_report(job, code), job.out);
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"momentsieve: recover models from moment sequences"};
  app.require_subcommand(1);
  Job job;
  for (const char* name : {"generate", "fit", "roundtrip"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--family", job.family, "Model family")->required();
    sub->add_option("--in", job.in, "Input JSON (model for generate, moments for fit)");
    sub->add_option("--out", job.out, "Output JSON; stdout when omitted");
    sub->add_option("--kernel-tol", job.kernel_tol, "Kernel or rank threshold in (0,1)");
    sub->add_option("--fit-tol", job.fit_tol, "Fit residual threshold in (0,1)");
    sub->add_option("--k", job.k, "Atoms, components, vertices or boxes");
    sub->add_option("--shape-d", job.shape_d, "Exponent degree for power-gaussian and density-exponent");
    sub->add_option("--seed", job.seed, "Seed for directions and roundtrip instances");
    sub->add_option("--directions", job.directions, "Number of projection directions (polytope)");
    sub->add_option("--support", job.support, "Support file for density-exponent");
    sub->callback([&job, name] { job.command = name; });
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    configure_logging();
    return execute(job);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const Rejection& e) {
    // Only reachable from generate: e.g. a model whose moments cannot be formed.
    std::cerr << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace cli
}  // namespace momentsieve
