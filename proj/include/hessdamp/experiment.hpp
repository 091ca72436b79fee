/**
 * @file experiment.hpp
 * @brief Declarative experiment configs, the problem registry, CSV trace
 * output and the batch runner behind the command-line tool.
 *
 * Config format: `[name]` opens an experiment; `key = value` lines follow.
 * `#` and `;` start comments. Vectors are comma-separated numbers; a number
 * may be written as a fraction `p/q`.
 *
 *     [example1_hb]
 *     problem   = example1
 *     method    = hb_hessian
 *     alpha     = 0.8
 *     theta     = 0.05
 *     beta      = 1/24
 *     init      = 3
 *     grad_tol  = 1e-9
 *     max_iters = 500
 *     output    = example1_hb_hessian.csv
 *
 * CSV columns: k,t,f_gap,grad_norm,step_norm,energy,x0..x{n-1}. Discrete
 * runs write t = k; ODE runs write simulation time and step_norm = |x_i - x_{i-1}|.
 */
#pragma once

#include "hessdamp/analysis.hpp"
#include "hessdamp/continuous.hpp"
#include "hessdamp/core.hpp"
#include "hessdamp/functions.hpp"
#include "hessdamp/solvers.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hessdamp {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownProblem : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownMethod : public ParseError {
 public:
  using ParseError::ParseError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Problem registry
// ---------------------------------------------------------------------------

struct ProblemRef {
  std::string name;
  std::vector<double> args;
  std::optional<double> gamma;
  std::optional<double> lipschitz;
};

[[nodiscard]] inline const std::vector<std::string>& registered_problems() {
  static const std::vector<std::string> names{"example1", "example2", "norm_power", "quadratic"};
  return names;
}

/// Builds a registered problem. Arguments:
///   example1   (none)
///   example2   a, b, c         (default 100, 1, 1)
///   norm_power alpha, n        (default 0.5, 1)
///   quadratic  n               (default 2)
/// Throws std::out_of_range for unknown names, InvalidInput for bad arguments.
[[nodiscard]] inline TestProblem make_problem(const ProblemRef& ref) {
  const auto& a = ref.args;
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (a.size() < lo || a.size() > hi) {
      throw InvalidInput(ref.name + " takes between " + std::to_string(lo) + " and " +
                         std::to_string(hi) + " arguments");
    }
  };
  auto as_dim = [](double v) {
    if (!(v >= 1.0) || v != std::floor(v)) throw InvalidInput("dimension must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  TestProblem p;
  if (ref.name == "example1") {
    arity(0, 0);
    p = example1();
  } else if (ref.name == "example2") {
    arity(0, 3);
    p = a.empty() ? example2(100.0, 1.0, 1.0) : (arity(3, 3), example2(a[0], a[1], a[2]));
  } else if (ref.name == "norm_power") {
    arity(0, 2);
    p = norm_power(a.size() > 0 ? a[0] : 0.5, a.size() > 1 ? as_dim(a[1]) : 1);
  } else if (ref.name == "quadratic") {
    arity(0, 1);
    p = half_squared_norm(a.empty() ? 2 : as_dim(a[0]));
  } else {
    throw std::out_of_range("unknown problem '" + ref.name + "'");
  }
  if (ref.gamma) p.metadata.gamma = *ref.gamma;
  if (ref.lipschitz) p.metadata.lipschitz_grad = *ref.lipschitz;
  return p;
}

// ---------------------------------------------------------------------------
// Configs
// ---------------------------------------------------------------------------

enum class Method { GradientDescent, HeavyBall, HeavyBallHessian, Nesterov, NesterovHessian, Ode };

[[nodiscard]] inline const char* to_string(Method m) {
  switch (m) {
    case Method::GradientDescent:
      return "gd";
    case Method::HeavyBall:
      return "hb";
    case Method::HeavyBallHessian:
      return "hb_hessian";
    case Method::Nesterov:
      return "nesterov";
    case Method::NesterovHessian:
      return "nesterov_hessian";
    case Method::Ode:
      return "ode";
  }
  return "unknown";
}

[[nodiscard]] inline std::optional<Method> method_from_string(std::string_view s) {
  for (Method m : {Method::GradientDescent, Method::HeavyBall, Method::HeavyBallHessian,
                   Method::Nesterov, Method::NesterovHessian, Method::Ode}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

struct GradientDescentParams {
  double beta = 0.0;
};

using MethodParams =
    std::variant<GradientDescentParams, HeavyBallParams, NesterovParams, ContinuousParams>;

struct ExperimentConfig {
  std::string name;
  std::size_t line = 0;  // line of the section header
  ProblemRef problem;
  Method method = Method::GradientDescent;
  MethodParams params;
  Integrator integrator = Integrator::RK4;
  Vector init;
  StoppingRule stop;
  std::vector<std::string> checks;
  std::size_t check_samples = 1000;
  std::string output_path;
  bool strict = false;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_plain_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

inline double parse_number(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  const auto slash = s.find('/');
  std::optional<double> v;
  if (slash == std::string::npos) {
    v = parse_plain_number(s);
  } else {
    const auto num = parse_plain_number(trim(s.substr(0, slash)));
    const auto den = parse_plain_number(trim(s.substr(slash + 1)));
    if (num && den && *den != 0.0) v = *num / *den;
  }
  if (!v) throw ParseError(line, "expected a number, got '" + s + "'");
  return *v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_numbers(const std::string& s, std::size_t line) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number(item, line));
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError(line, "expected a boolean, got '" + s + "'");
}

inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> names{
      "strong_quasiconvexity", "pl",       "quadratic_growth", "gradient_characterization",
      "descent_lemma",         "lipschitz", "kappa",           "gradient_fd",
      "hvp_fd"};
  return names;
}

struct Entry {
  std::string value;
  std::size_t line;
};

using Section = std::map<std::string, Entry>;

inline const std::set<std::string>& keys_for(Method m) {
  static const std::set<std::string> gd{"beta", "grad_tol", "max_iters", "step_tol"};
  static const std::set<std::string> hb{"alpha", "theta", "beta", "grad_tol", "max_iters",
                                        "step_tol"};
  static const std::set<std::string> nes{"alpha",    "theta",     "beta",    "eta",
                                         "epsilon",  "grad_tol",  "max_iters", "step_tol"};
  static const std::set<std::string> ode{"alpha", "beta", "kappa", "dt", "t_end", "integrator",
                                         "v0"};
  switch (m) {
    case Method::GradientDescent:
      return gd;
    case Method::HeavyBall:
    case Method::HeavyBallHessian:
      return hb;
    case Method::Nesterov:
    case Method::NesterovHessian:
      return nes;
    case Method::Ode:
      return ode;
  }
  return gd;
}

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"problem", "args",   "gamma",   "lipschitz", "method",
                                          "init",    "checks", "samples", "output",    "strict"};
  return keys;
}

inline bool is_known_key(const std::string& k) {
  if (common_keys().count(k)) return true;
  for (Method m : {Method::GradientDescent, Method::HeavyBall, Method::Nesterov, Method::Ode}) {
    if (keys_for(m).count(k)) return true;
  }
  return false;
}

inline ExperimentConfig build_config(const std::string& name, std::size_t header_line,
                                     const Section& sec) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.line = header_line;

  auto get = [&](const std::string& key) -> const Entry* {
    const auto it = sec.find(key);
    return it == sec.end() ? nullptr : &it->second;
  };
  auto number = [&](const std::string& key, double fallback) {
    const Entry* e = get(key);
    return e ? parse_number(e->value, e->line) : fallback;
  };
  auto required = [&](const std::string& key) {
    const Entry* e = get(key);
    if (!e) throw ParseError(header_line, "experiment '" + name + "' is missing '" + key + "'");
    return parse_number(e->value, e->line);
  };

  const Entry* method = get("method");
  if (!method) throw ParseError(header_line, "experiment '" + name + "' is missing 'method'");
  const auto m = method_from_string(method->value);
  if (!m) throw UnknownMethod(method->line, "unknown method '" + method->value + "'");
  cfg.method = *m;

  const Entry* problem = get("problem");
  if (!problem) throw ParseError(header_line, "experiment '" + name + "' is missing 'problem'");
  cfg.problem.name = problem->value;
  if (const Entry* e = get("args")) cfg.problem.args = parse_numbers(e->value, e->line);
  if (const Entry* e = get("gamma")) cfg.problem.gamma = parse_number(e->value, e->line);
  if (const Entry* e = get("lipschitz")) cfg.problem.lipschitz = parse_number(e->value, e->line);

  for (const auto& [key, entry] : sec) {
    if (!common_keys().count(key) && !keys_for(cfg.method).count(key)) {
      throw ParseError(entry.line,
                       "key '" + key + "' does not apply to method '" + to_string(cfg.method) + "'");
    }
  }

  TestProblem p;
  try {
    p = make_problem(cfg.problem);
  } catch (const std::out_of_range&) {
    throw UnknownProblem(problem->line, "unknown problem '" + problem->value + "'");
  } catch (const InvalidInput& ex) {
    throw ParseError(problem->line, ex.what());
  }

  cfg.init = p.default_init;
  if (const Entry* e = get("init")) {
    cfg.init = to_vector(parse_numbers(e->value, e->line));
    if (static_cast<std::size_t>(cfg.init.size()) != p.dim()) {
      throw ParseError(e->line, "init has " + std::to_string(cfg.init.size()) +
                                    " entries, problem dimension is " + std::to_string(p.dim()));
    }
  }

  if (const Entry* e = get("checks")) {
    cfg.checks = split_list(e->value);
    for (const auto& c : cfg.checks) {
      if (!known_checks().count(c)) throw ParseError(e->line, "unknown check '" + c + "'");
    }
  }
  if (const Entry* e = get("samples")) {
    const double s = parse_number(e->value, e->line);
    if (!(s >= 1.0) || s != std::floor(s)) throw ParseError(e->line, "samples must be a positive integer");
    cfg.check_samples = static_cast<std::size_t>(s);
  }
  if (const Entry* e = get("output")) cfg.output_path = e->value;
  if (const Entry* e = get("strict")) cfg.strict = parse_bool(e->value, e->line);

  if (cfg.method != Method::Ode) {
    cfg.stop.grad_tol = number("grad_tol", cfg.stop.grad_tol);
    const double iters = number("max_iters", static_cast<double>(cfg.stop.max_iters));
    if (!(iters >= 1.0) || iters != std::floor(iters)) {
      throw ParseError(get("max_iters")->line, "max_iters must be a positive integer");
    }
    cfg.stop.max_iters = static_cast<std::size_t>(iters);
    if (const Entry* e = get("step_tol")) cfg.stop.step_tol = parse_number(e->value, e->line);
    try {
      cfg.stop.validate();
    } catch (const InvalidInput& ex) {
      throw ParseError(header_line, ex.what());
    }
  }

  auto check_params = [&](auto&& validate) {
    try {
      validate();
    } catch (const InvalidInput& ex) {
      throw ParseError(header_line, std::string("experiment '") + name + "': " + ex.what());
    }
  };

  switch (cfg.method) {
    case Method::GradientDescent: {
      GradientDescentParams gp{required("beta")};
      check_params([&] {
        if (!(gp.beta > 0.0)) throw InvalidInput("beta must be > 0");
      });
      cfg.params = gp;
      break;
    }
    case Method::HeavyBall:
    case Method::HeavyBallHessian: {
      HeavyBallParams hp{number("alpha", 0.0), number("theta", 0.0), required("beta")};
      if (cfg.method == Method::HeavyBall && hp.theta != 0.0) {
        throw ParseError(get("theta")->line, "method 'hb' has no Hessian correction; use hb_hessian");
      }
      check_params([&] { hp.validate(); });
      cfg.params = hp;
      break;
    }
    case Method::Nesterov:
    case Method::NesterovHessian: {
      NesterovParams np;
      np.alpha = number("alpha", 0.0);
      np.theta = number("theta", 0.0);
      np.beta = required("beta");
      np.eta = number("eta", 2.0);
      np.epsilon = number("epsilon", 0.0);
      if (cfg.method == Method::Nesterov && np.theta != 0.0) {
        throw ParseError(get("theta")->line,
                         "method 'nesterov' has no Hessian correction; use nesterov_hessian");
      }
      check_params([&] { np.validate(); });
      cfg.params = np;
      break;
    }
    case Method::Ode: {
      Vector v0 = Vector::Zero(cfg.init.size());
      if (const Entry* e = get("v0")) {
        v0 = to_vector(parse_numbers(e->value, e->line));
        if (v0.size() != cfg.init.size()) throw ParseError(e->line, "v0 length differs from init");
      }
      if (const Entry* e = get("integrator")) {
        if (e->value == "rk4") {
          cfg.integrator = Integrator::RK4;
        } else if (e->value == "euler") {
          cfg.integrator = Integrator::Euler;
        } else {
          throw ParseError(e->line, "integrator must be 'rk4' or 'euler'");
        }
      }
      auto cp = ContinuousParams::make(required("alpha"), number("beta", 0.0), required("kappa"),
                                       required("t_end"), number("dt", 1e-3), cfg.init, v0);
      check_params([&] { cp.validate(); });
      cfg.params = std::move(cp);
      break;
    }
  }
  return cfg;
}

}  // namespace detail

/// Parses a config file's text into experiments in file order.
[[nodiscard]] inline std::vector<ExperimentConfig> parse_config(const std::string& text) {
  std::vector<ExperimentConfig> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  std::optional<std::string> name;
  std::size_t header_line = 0;
  detail::Section section;
  std::set<std::string> names;

  auto flush = [&] {
    if (name) out.push_back(detail::build_config(*name, header_line, section));
    section.clear();
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      flush();
      name = detail::trim(line.substr(1, line.size() - 2));
      header_line = line_no;
      if (name->empty()) throw ParseError(line_no, "empty section name");
      if (!names.insert(*name).second) throw ParseError(line_no, "duplicate experiment '" + *name + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!name) throw ParseError(line_no, "key '" + key + "' outside of any [experiment] section");
    if (!detail::is_known_key(key)) throw ParseError(line_no, "unknown key '" + key + "'");
    if (value.empty()) throw ParseError(line_no, "key '" + key + "' has no value");
    if (!section.emplace(key, detail::Entry{value, line_no}).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  flush();
  return out;
}

[[nodiscard]] inline std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {

inline void write_csv_header(std::ostream& os, Eigen::Index n) {
  os << "k,t,f_gap,grad_norm,step_norm,energy";
  for (Eigen::Index j = 0; j < n; ++j) os << ",x" << j;
  os << '\n';
}

inline void write_csv_row(std::ostream& os, std::size_t k, double t, double f_gap,
                          double grad_norm, double step_norm, double energy, const Vector& x) {
  os << k << ',' << format_double(t) << ',' << format_double(f_gap) << ','
     << format_double(grad_norm) << ',' << format_double(step_norm) << ','
     << format_double(energy);
  for (Eigen::Index j = 0; j < x.size(); ++j) os << ',' << format_double(x[j]);
  os << '\n';
}

/// Writes through a sibling temporary file renamed into place, so a failed
/// write never leaves a partial file at `path`.
template <class Body>
void write_atomically(const std::filesystem::path& path, Body&& body) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    body(os);
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace detail

inline void write_csv(std::ostream& os, const IterationTrace& trace) {
  const Eigen::Index n = trace.records.empty() ? 0 : trace.records.front().x.size();
  detail::write_csv_header(os, n);
  for (const auto& r : trace.records) {
    detail::write_csv_row(os, r.k, static_cast<double>(r.k), r.f_gap, r.grad_norm, r.step_norm,
                          r.energy, r.x);
  }
}

inline void write_csv(std::ostream& os, const TrajectoryTrace& trace) {
  const Eigen::Index n = trace.records.empty() ? 0 : trace.records.front().x.size();
  detail::write_csv_header(os, n);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    const double step = i == 0 ? 0.0 : (r.x - trace.records[i - 1].x).norm();
    detail::write_csv_row(os, i, r.t, r.f_gap, r.grad_norm, step, r.energy, r.x);
  }
}

// ---------------------------------------------------------------------------
// Oscillation comparison
// ---------------------------------------------------------------------------

struct ComparisonRecord {
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  long long difference = 0;  // count_b - count_a
};

/// Sign changes of the first coordinate of x_k - xbar on each trace.
[[nodiscard]] inline ComparisonRecord compare_oscillations(const IterationTrace& a,
                                                           const IterationTrace& b,
                                                           const Vector& xbar) {
  ComparisonRecord c;
  c.count_a = sign_changes(a, xbar);
  c.count_b = sign_changes(b, xbar);
  c.difference = static_cast<long long>(c.count_b) - static_cast<long long>(c.count_a);
  return c;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

enum class ExitStatus { Ok, Diverged, RejectedByCertificate, IoFailure, Error };

[[nodiscard]] inline const char* to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::Ok:
      return "ok";
    case ExitStatus::Diverged:
      return "diverged";
    case ExitStatus::RejectedByCertificate:
      return "rejected-by-certificate";
    case ExitStatus::IoFailure:
      return "io-error";
    case ExitStatus::Error:
      return "error";
  }
  return "unknown";
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool strict = false;  // overrides to strict when true
  std::uint64_t seed = 42;
};

/// Verdict of the applicable certificate for a config.
struct CertificateVerdict {
  bool available = false;  // false when the problem lacks the constants
  bool valid = false;
  std::string detail;  // "rate=..." when valid, violations otherwise
};

[[nodiscard]] inline CertificateVerdict certify(const ExperimentConfig& cfg,
                                                const TestProblem& problem) {
  CertificateVerdict v;
  auto join = [](const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : "|") + i;
    return s;
  };
  auto fill = [&](bool valid, double rate, const std::vector<std::string>& violations) {
    v.available = !(violations.size() == 1 && violations.front() == "missing constants");
    v.valid = valid;
    v.detail = valid ? "rate=" + detail::format_double(rate) : join(violations);
  };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GradientDescentParams>) {
          const auto c = validate_heavy_ball({0.0, 0.0, p.beta}, problem.metadata);
          fill(c.valid, c.contraction, c.violations);
        } else if constexpr (std::is_same_v<P, HeavyBallParams>) {
          const auto c = validate_heavy_ball(p, problem.metadata);
          fill(c.valid, c.contraction, c.violations);
        } else if constexpr (std::is_same_v<P, NesterovParams>) {
          const auto c = validate_nesterov(p, problem.metadata);
          fill(c.valid, c.rate, c.violations);
        } else {
          const auto c = validate_continuous(p, problem.metadata);
          fill(c.valid, c.rate, c.violations);
        }
      },
      cfg.params);
  return v;
}

[[nodiscard]] inline std::string certificate_field(const CertificateVerdict& v) {
  if (!v.available) return "unavailable";
  return v.valid ? "valid(" + v.detail + ")" : "invalid(" + v.detail + ")";
}

/// Runs one property check by name against a problem. The gamma-taking
/// checks use the metadata modulus.
[[nodiscard]] inline PropertyReport run_check(const std::string& name, const TestProblem& p,
                                              std::size_t samples, std::uint64_t seed) {
  if (name == "strong_quasiconvexity") {
    return check_strong_quasiconvexity(p, p.metadata.gamma, samples, seed);
  }
  if (name == "pl") return check_pl(p, samples, seed);
  if (name == "quadratic_growth") return check_quadratic_growth(p, samples, seed);
  if (name == "gradient_characterization") {
    return check_gradient_characterization(p, p.metadata.gamma, samples, seed);
  }
  if (name == "descent_lemma") return check_descent_lemma(p, samples, seed);
  if (name == "lipschitz") return check_lipschitz_gradient(p, samples, seed);
  if (name == "gradient_fd") return check_gradient_fd(p, samples, seed);
  if (name == "hvp_fd") return check_hvp_fd(p, samples, seed);
  if (name == "kappa") {
    const auto est = estimate_kappa(p, samples, -1.0, seed);
    PropertyReport r;
  r.property = "kappa";
    r.seed = seed;
    r.samples = est.samples;
    r.worst_violation = est.kappa_hat;  // the estimate itself; "passes" when positive
    r.witness.assign(est.argmin.data(), est.argmin.data() + est.argmin.size());
    r.slack = 0.0;
    r.passed = est.kappa_hat > 0.0;
    return r;
  }
  throw InvalidInput("unknown check '" + name + "'");
}

struct ExperimentOutcome {
  std::string name;
  ExitStatus status = ExitStatus::Ok;
  std::string summary;  // one line
  std::string error;
};

[[nodiscard]] inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                                      const RunOptions& opts = {}) {
  ExperimentOutcome out;
  out.name = cfg.name;
  std::ostringstream line;
  line << "name=" << cfg.name << " method=" << to_string(cfg.method)
       << " problem=" << cfg.problem.name;

  auto finish = [&](ExitStatus s, const std::string& extra = "") {
    out.status = s;
    line << " status=" << to_string(s);
    if (!extra.empty()) line << ' ' << extra;
    out.summary = line.str();
    return out;
  };

  TestProblem problem;
  try {
    problem = make_problem(cfg.problem);
  } catch (const std::exception& ex) {
    out.error = ex.what();
    return finish(ExitStatus::Error, "error=\"" + out.error + "\"");
  }

  const CertificateVerdict cert = certify(cfg, problem);
  line << " certificate=" << certificate_field(cert);
  if ((cfg.strict || opts.strict) && !cert.valid) {
    out.error = "refused by certificate";
    return finish(ExitStatus::RejectedByCertificate);
  }

  std::ostringstream extra;
  ExitStatus status = ExitStatus::Ok;
  try {
    const std::filesystem::path out_path =
        cfg.output_path.empty() ? std::filesystem::path()
                                : opts.out_dir / std::filesystem::path(cfg.output_path);

    if (cfg.method == Method::Ode) {
      const auto& cp = std::get<ContinuousParams>(cfg.params);
      const TrajectoryTrace tr = integrate(problem, cp, cfg.integrator);
      if (!out_path.empty()) {
        detail::write_atomically(out_path, [&](std::ostream& os) { write_csv(os, tr); });
      }
      if (tr.diverged()) status = ExitStatus::Diverged;
      if (!tr.records.empty()) {
        const auto& last = tr.records.back();
        extra << "steps=" << tr.records.size() - 1 << " t_end=" << detail::format_double(last.t)
              << " final_f_gap=" << detail::format_double(last.f_gap)
              << " final_grad_norm=" << detail::format_double(last.grad_norm);
      }
      const auto& meta = problem.metadata;
      if (!tr.records.empty() && meta.has_gamma() && meta.minimizer && meta.min_value) {
        const auto rep = check_energy_decay(tr, cp, meta);
        extra << " decay_bound=" << (rep.passed ? "pass" : "fail")
              << " max_energy_growth=" << detail::format_double(rep.max_energy_growth);
      }
    } else {
      IterationTrace tr;
      std::visit(
          [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GradientDescentParams>) {
              tr = gradient_descent(problem, p.beta, cfg.init, cfg.stop);
            } else if constexpr (std::is_same_v<P, HeavyBallParams>) {
              tr = cfg.method == Method::HeavyBall ? heavy_ball(problem, p, cfg.init, cfg.stop)
                                                   : heavy_ball_hessian(problem, p, cfg.init, cfg.stop);
            } else if constexpr (std::is_same_v<P, NesterovParams>) {
              tr = cfg.method == Method::Nesterov ? nesterov(problem, p, cfg.init, cfg.stop)
                                                  : nesterov_hessian(problem, p, cfg.init, cfg.stop);
            }
          },
          cfg.params);
      if (!out_path.empty()) {
        detail::write_atomically(out_path, [&](std::ostream& os) { write_csv(os, tr); });
      }
      if (tr.diverged()) status = ExitStatus::Diverged;
      extra << "run=" << to_string(tr.status) << " iterations=" << tr.iterations();
      if (!tr.records.empty()) {
        extra << " final_f_gap=" << detail::format_double(tr.back().f_gap)
              << " final_grad_norm=" << detail::format_double(tr.back().grad_norm);
      }
      if (problem.metadata.minimizer) {
        extra << " oscillations=" << sign_changes(tr, *problem.metadata.minimizer);
      }
    }
    if (!cfg.checks.empty()) {
      extra << " checks=";
      bool first = true;
      for (const auto& c : cfg.checks) {
        const auto rep = run_check(c, problem, cfg.check_samples, opts.seed);
        extra << (first ? "" : ",") << c << ':' << (rep.passed ? "pass" : "fail");
        first = false;
      }
      extra << " seed=" << opts.seed;
    }
    if (!out_path.empty()) extra << " output=" << out_path.string();
  } catch (const IoError& ex) {
    out.error = ex.what();
    return finish(ExitStatus::IoFailure, "error=\"" + out.error + "\"");
  } catch (const std::exception& ex) {
    out.error = ex.what();
    return finish(ExitStatus::Error, "error=\"" + out.error + "\"");
  }
  return finish(status, extra.str());
}

/// Runs every experiment concurrently; outcomes come back in config order.
[[nodiscard]] inline std::vector<ExperimentOutcome> run_all(
    const std::vector<ExperimentConfig>& configs, const RunOptions& opts) {
  std::vector<std::future<ExperimentOutcome>> jobs;
  jobs.reserve(configs.size());
  for (const auto& cfg : configs) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &opts] { return run_experiment(cfg, opts); }));
  }
  std::vector<ExperimentOutcome> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace hessdamp
