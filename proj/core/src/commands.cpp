#include "kgm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace kgm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path prepare_dir(const RunConfig& cfg) {
  std::filesystem::path dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void write_profile(const std::filesystem::path& dir, const std::string& name,
                   const RadialDomain& dom, const GridFunction& f) {
  auto out = open_out(dir / (name + ".csv"));
  out << "r,value\n";
  for (int i = 0; i < f.size(); ++i)
    out << num(dom.nodes[i]) << "," << num(f[i]) << "\n";
}

bool clean_verdict(const RunConfig& cfg, const SolveResult& res) {
  if (res.status == SolveStatus::BoundaryApproach) return true;
  return res.status == SolveStatus::Converged &&
         res.pde_residuals.first <= cfg.pde_tol &&
         res.pde_residuals.second <= cfg.pde_tol;
}

void embed_config(std::ostream& out, const RunConfig& cfg) {
  out << "config:\n";
  std::istringstream lines(format_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "  " << line << "\n";
}

void render_result(std::ostream& out, const SolveResult& res) {
  out << "  status = " << to_string(res.status) << "\n";
  out << "  j = " << num(res.j_star) << "\n";
  out << "  grad_norm = " << num(res.grad_norm) << "\n";
  out << "  residual_u = " << num(res.pde_residuals.first) << "\n";
  out << "  residual_phi = " << num(res.pde_residuals.second) << "\n";
  out << "  iterations = " << res.iterations << "\n";
}

void render_report(std::ostream& out, const CheckReport& rep) {
  out << (rep.skipped ? "SKIP" : rep.passed ? "PASS" : "FAIL") << "  "
      << rep.name << "\n";
  out << "  claim: " << rep.statement << "\n";
  if (rep.skipped) {
    out << "  reason: " << rep.skip_reason << "\n";
  } else {
    out << "  samples = " << rep.samples
        << ", worst_slack = " << num(rep.worst_slack)
        << ", tolerance = " << num(rep.tolerance) << "\n";
  }
  for (const auto& d : rep.details) out << "  " << d << "\n";
}

} // namespace

std::string resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("KGM_OUTPUT_DIR"); env && *env)
    return env;
  return cfg.output_dir;
}

int cmd_solve(const RunConfig& cfg) {
  const Problem prob = instantiate(cfg);
  const SolveOptions opts = solve_options(cfg);
  const auto dir = prepare_dir(cfg);

  std::vector<SolveResult> rounds;
  rounds.push_back(minimize(prob.dom, default_start(prob.dom, prob.p), prob.p,
                            prob.chi, prob.dc, opts));

  // Deflation needs at least one converged root to deflate against.
  std::vector<SolveResult> roots;
  if (rounds.front().status == SolveStatus::Converged)
    roots.push_back(rounds.front());
  for (int round = 0; round < cfg.deflation_rounds && !roots.empty();
       ++round) {
    rounds.push_back(
        deflate_and_resolve(prob.dom, roots, prob.p, prob.chi, prob.dc, opts));
    if (rounds.back().status != SolveStatus::Converged) break;
    roots.push_back(rounds.back());
  }

  const SolveResult& primary = rounds.front();
  {
    auto out = open_out(dir / "summary.txt");
    out << "solve summary\n\n";
    out << "result:\n";
    render_result(out, primary);
    if (primary.status != SolveStatus::BoundaryApproach) {
      double umin = 0.0;
      GridFunction u2 = primary.u_star;
      for (int i = 0; i < u2.size(); ++i) {
        umin = std::min(umin, u2[i]);
        u2[i] *= u2[i];
      }
      out << "  u_l2 = " << num(std::sqrt(integrate(prob.dom, u2))) << "\n";
      out << "  u_min = " << num(umin) << "\n";
      out << "  qu_l3 = " << num(primary.state.qu_l3) << "\n";
      out << "  xi_bar = " << num(primary.state.xi_bar) << "\n";
      out << "  eta_bar = " << num(primary.state.eta_bar) << "\n";
      out << "  theta_bar = " << num(primary.state.theta_bar) << "\n";
    }
    for (size_t k = 1; k < rounds.size(); ++k) {
      out << "\ndeflation round " << k << ":\n";
      render_result(out, rounds[k]);
    }
    out << "\nconstants:\n";
    out << "  c1 = " << num(prob.dc.c1) << "\n";
    out << "  c2 = " << num(prob.dc.c2) << "\n";
    out << "  c3 = " << num(prob.dc.c3) << "\n";
    out << "  c1_positive = " << (prob.dc.c1_positive ? "true" : "false")
        << "\n";
    out << "  chi_max = " << num(prob.chi.max_abs) << "\n";
    out << "  total_charge = " << num(prob.p.bd.total_charge) << "\n";
    out << "  flux_surrogate = " << num(prob.p.bd.alpha_surrogate_norm)
        << "\n\n";
    embed_config(out, cfg);
  }

  write_profile(dir, "chi", prob.dom, prob.chi.values);
  if (primary.status != SolveStatus::BoundaryApproach) {
    write_profile(dir, "u", prob.dom, primary.state.u);
    write_profile(dir, "phi", prob.dom, primary.state.phi);
    write_profile(dir, "xi", prob.dom, primary.state.xi);
    write_profile(dir, "eta", prob.dom, primary.state.eta);
    write_profile(dir, "theta", prob.dom, primary.state.theta);
  }

  std::cout << "solve: " << to_string(primary.status)
            << ", j = " << num(primary.j_star) << ", outputs in "
            << dir.string() << "\n";
  return clean_verdict(cfg, primary) ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg) {
  const Problem prob = instantiate(cfg);
  const auto dir = prepare_dir(cfg);
  const auto reports =
      run_lemma_suite(prob.dom, prob.p, cfg.seed, cfg.n_samples);

  int passed = 0, skipped = 0, failed = 0;
  {
    auto out = open_out(dir / "verify_report.txt");
    out << "verification report\n\n";
    for (const auto& rep : reports) {
      render_report(out, rep);
      out << "\n";
      if (rep.skipped)
        ++skipped;
      else if (rep.passed)
        ++passed;
      else
        ++failed;
    }
    out << "totals: " << passed << " passed, " << skipped << " skipped, "
        << failed << " failed\n\n";
    embed_config(out, cfg);
  }

  std::cout << "verify: " << passed << " passed, " << skipped << " skipped, "
            << failed << " failed, report in " << dir.string() << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_experiment(const std::string& name, const RunConfig& cfg) {
  const Problem prob = instantiate(cfg);
  const auto dir = prepare_dir(cfg);

  CheckReport rep;
  if (name == "blowup") {
    rep = experiment_blowup(prob.dom, prob.p,
                            default_start(prob.dom, prob.p), 20);
  } else if (name == "noQ") {
    rep = experiment_noQ(prob.dom, prob.p, 4);
  } else if (name == "nonexistence") {
    rep = experiment_nonexistence(prob.dom, prob.p, cfg.seed, 5);
  } else {
    throw std::invalid_argument("unknown experiment '" + name +
                                "' (expected blowup, noQ, or nonexistence)");
  }

  {
    auto out = open_out(dir / ("experiment_" + name + ".txt"));
    out << "experiment: " << name << "\n\n";
    render_report(out, rep);
    out << "\n";
    embed_config(out, cfg);
  }

  std::cout << "experiment " << name << ": "
            << (rep.passed ? "PASS" : "FAIL") << ", report in "
            << dir.string() << "\n";
  return rep.passed ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param,
              const std::vector<double>& values) {
  if (param != "omega" && param != "alpha" && param != "m")
    throw std::invalid_argument("unknown sweep parameter '" + param +
                                "' (expected omega, alpha, or m)");
  if (values.empty())
    throw std::invalid_argument("sweep needs at least one value");

  const auto dir = prepare_dir(cfg);
  auto out = open_out(dir / "sweep.csv");
  out << "value,j_star,status\n";

  bool all_clean = true;
  for (double v : values) {
    RunConfig point = cfg;
    if (param == "omega")
      point.omega = v;
    else if (param == "alpha")
      point.alpha = v;
    else
      point.m = v;

    const Problem prob = instantiate(point);
    const SolveResult res =
        minimize(prob.dom, default_start(prob.dom, prob.p), prob.p, prob.chi,
                 prob.dc, solve_options(point));
    out << num(v) << "," << num(res.j_star) << "," << to_string(res.status)
        << "\n";
    all_clean = all_clean && clean_verdict(point, res);
    std::cout << "sweep " << param << " = " << num(v) << ": "
              << to_string(res.status) << ", j = " << num(res.j_star) << "\n";
  }
  std::cout << "sweep table in " << dir.string() << "\n";
  return all_clean ? 0 : 1;
}

} // namespace kgm
