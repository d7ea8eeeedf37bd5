#include "kgm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace kgm {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_number(const std::string& s, int line) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + s + "'");
  }
  if (pos != s.size())
    throw ParseError(line, "trailing characters after number in '" + s + "'");
  return v;
}

long parse_integer(const std::string& s, int line) {
  size_t pos = 0;
  long v;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + s + "'");
  }
  if (pos != s.size())
    throw ParseError(line, "trailing characters after integer in '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

QSpec parse_qspec(const std::string& value, int line) {
  const size_t open = value.find('(');
  if (open == std::string::npos || value.back() != ')')
    throw ParseError(line, "q_spec must look like name(args); got '" + value +
                               "'");
  const std::string name = trim(value.substr(0, open));
  const std::string inner =
      trim(value.substr(open + 1, value.size() - open - 2));

  QSpec q;
  q.args.clear();
  const auto want = [&](QSpec::Kind kind, size_t count) {
    q.kind = kind;
    const auto parts = split(inner, ',');
    if (inner.empty() || parts.size() != count)
      throw ParseError(line, "q_spec " + name + " takes " +
                                 std::to_string(count) + " argument(s)");
    for (const auto& part : parts) q.args.push_back(parse_number(part, line));
  };

  if (name == "constant") {
    want(QSpec::Kind::Constant, 1);
  } else if (name == "annulus") {
    want(QSpec::Kind::Annulus, 3);
  } else if (name == "step_with_gap") {
    want(QSpec::Kind::StepWithGap, 2);
  } else if (name == "decay") {
    want(QSpec::Kind::Decay, 1);
  } else if (name == "table") {
    q.kind = QSpec::Kind::Table;
    for (const auto& part : split(inner, ',')) {
      const auto pair = split(part, ':');
      if (pair.size() != 2)
        throw ParseError(line, "table entries look like r:q; got '" + part +
                                   "'");
      q.table.emplace_back(parse_number(pair[0], line),
                           parse_number(pair[1], line));
    }
    if (q.table.size() < 2)
      throw ParseError(line, "table needs at least two r:q points");
    for (size_t i = 1; i < q.table.size(); ++i)
      if (!(q.table[i].first > q.table[i - 1].first))
        throw ParseError(line, "table radii must increase strictly");
  } else {
    throw ParseError(line, "unknown q_spec form '" + name + "'");
  }
  return q;
}

} // namespace

std::string QSpec::to_string() const {
  switch (kind) {
    case Kind::Constant:
      return "constant(" + num(args[0]) + ")";
    case Kind::Annulus:
      return "annulus(" + num(args[0]) + ", " + num(args[1]) + ", " +
             num(args[2]) + ")";
    case Kind::StepWithGap:
      return "step_with_gap(" + num(args[0]) + ", " + num(args[1]) + ")";
    case Kind::Decay:
      return "decay(" + num(args[0]) + ")";
    case Kind::Table: {
      std::string s = "table(";
      for (size_t i = 0; i < table.size(); ++i) {
        if (i) s += ", ";
        s += num(table[i].first) + ":" + num(table[i].second);
      }
      return s + ")";
    }
  }
  return "constant(1)";
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool saw_boundary_tol = false, saw_singular_tol = false;

  while (std::getline(in, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    const std::string stripped =
        trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (stripped.empty()) continue;

    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(line, "expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "empty key");
    if (value.empty()) throw ParseError(line, "empty value for '" + key + "'");

    if (key == "R") {
      cfg.R = parse_number(value, line);
    } else if (key == "N") {
      cfg.N = static_cast<int>(parse_integer(value, line));
    } else if (key == "m") {
      cfg.m = parse_number(value, line);
    } else if (key == "omega") {
      cfg.omega = parse_number(value, line);
    } else if (key == "alpha") {
      cfg.alpha = parse_number(value, line);
    } else if (key == "q_spec") {
      cfg.q_spec = parse_qspec(value, line);
    } else if (key == "q0") {
      cfg.q0 = parse_number(value, line);
    } else if (key == "grad_tol") {
      cfg.grad_tol = parse_number(value, line);
    } else if (key == "pde_tol") {
      cfg.pde_tol = parse_number(value, line);
    } else if (key == "boundary_tol") {
      cfg.boundary_tol = parse_number(value, line);
      saw_boundary_tol = true;
    } else if (key == "singular_tol") {
      cfg.singular_tol = parse_number(value, line);
      saw_singular_tol = true;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_integer(value, line));
    } else if (key == "max_iter") {
      cfg.max_iter = static_cast<int>(parse_integer(value, line));
    } else if (key == "n_samples") {
      cfg.n_samples = static_cast<int>(parse_integer(value, line));
    } else if (key == "deflation_rounds") {
      cfg.deflation_rounds = static_cast<int>(parse_integer(value, line));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }

  // Resolve the derived tolerance defaults before validating.
  if (!saw_singular_tol) {
    const double volume =
        4.0 * std::numbers::pi / 3.0 * cfg.R * cfg.R * cfg.R;
    cfg.singular_tol = 1e-8 * std::cbrt(std::max(volume, 0.0));
  }
  if (!saw_boundary_tol) cfg.boundary_tol = 1e3 * cfg.singular_tol;

  if (!(cfg.R > 0.0)) throw ValidationError("R > 0 is required");
  if (cfg.N < 16) throw ValidationError("N >= 16 is required");
  if (!(cfg.grad_tol > 0.0)) throw ValidationError("grad_tol > 0 is required");
  if (!(cfg.pde_tol > 0.0)) throw ValidationError("pde_tol > 0 is required");
  if (!(cfg.boundary_tol > 0.0))
    throw ValidationError("boundary_tol > 0 is required");
  if (!(cfg.singular_tol > 0.0))
    throw ValidationError("singular_tol > 0 is required");
  if (cfg.max_iter < 1) throw ValidationError("max_iter >= 1 is required");
  if (cfg.n_samples < 1) throw ValidationError("n_samples >= 1 is required");
  if (cfg.deflation_rounds < 0)
    throw ValidationError("deflation_rounds >= 0 is required");
  if (cfg.q0 && !(*cfg.q0 > 0.0))
    throw ValidationError("q0 > 0 is required when given");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "R = " << num(cfg.R) << "\n";
  out << "N = " << cfg.N << "\n";
  out << "m = " << num(cfg.m) << "\n";
  out << "omega = " << num(cfg.omega) << "\n";
  out << "alpha = " << num(cfg.alpha) << "\n";
  out << "q_spec = " << cfg.q_spec.to_string() << "\n";
  if (cfg.q0) out << "q0 = " << num(*cfg.q0) << "\n";
  out << "grad_tol = " << num(cfg.grad_tol) << "\n";
  out << "pde_tol = " << num(cfg.pde_tol) << "\n";
  out << "boundary_tol = " << num(cfg.boundary_tol) << "\n";
  out << "singular_tol = " << num(cfg.singular_tol) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  out << "n_samples = " << cfg.n_samples << "\n";
  out << "deflation_rounds = " << cfg.deflation_rounds << "\n";
  out << "output_dir = " << cfg.output_dir << "\n";
  return out.str();
}

Problem instantiate(const RunConfig& cfg) {
  Problem prob{RadialDomain::make(cfg.R, cfg.N), {}, {}, {}};
  prob.p.m = cfg.m;
  prob.p.omega = cfg.omega;

  const double R = cfg.R;
  const QSpec& q = cfg.q_spec;
  std::function<double(double)> profile;
  std::optional<double> gap = cfg.q0;
  switch (q.kind) {
    case QSpec::Kind::Constant:
      profile = [&q](double) { return q.args[0]; };
      if (!gap && q.args[0] != 0.0) gap = std::abs(q.args[0]);
      break;
    case QSpec::Kind::Annulus:
      profile = [&q](double r) {
        return r >= q.args[0] && r <= q.args[1] ? q.args[2] : 1.0;
      };
      if (!gap) {
        const double v = std::abs(q.args[2]);
        gap = v == 0.0 ? 1.0 : std::min(1.0, v);
      }
      break;
    case QSpec::Kind::StepWithGap:
      profile = [&q, R](double r) {
        return r < R / 2.0 ? q.args[0] : q.args[1];
      };
      if (!gap)
        gap = std::min(std::abs(q.args[0]), std::abs(q.args[1]));
      break;
    case QSpec::Kind::Decay:
      profile = [&q, R](double r) {
        const double s = std::max(0.0, 2.0 * (r - R / 2.0) / R);
        return q.args[0] * s * s;
      };
      break;
    case QSpec::Kind::Table:
      profile = [&q](double r) {
        const auto& t = q.table;
        if (r <= t.front().first) return t.front().second;
        if (r >= t.back().first) return t.back().second;
        for (size_t i = 1; i < t.size(); ++i)
          if (r <= t[i].first) {
            const double w =
                (r - t[i - 1].first) / (t[i].first - t[i - 1].first);
            return (1.0 - w) * t[i - 1].second + w * t[i].second;
          }
        return t.back().second;
      };
      break;
  }

  try {
    prob.p.q = CouplingField::make(
        prob.dom, GridFunction::sample(prob.dom, Bc::NeumannBoth, profile),
        gap);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("q_spec yields an invalid coupling: ") +
                          e.what());
  }
  prob.p.bd = BoundaryData::make(cfg.alpha, prob.dom);
  prob.chi = solve_chi(prob.p.bd, prob.dom);
  prob.dc = compute_constants(prob.dom, prob.p, prob.chi);
  return prob;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.grad_tol_scale = cfg.grad_tol;
  opts.pde_tol = cfg.pde_tol;
  opts.singular_tol = cfg.singular_tol;
  opts.boundary_factor = cfg.boundary_tol / cfg.singular_tol;
  return opts;
}

} // namespace kgm
