#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgm/commands.hpp"

using namespace kgm;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing ", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Scratch directory wiped on construction; paths live under it.
struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& name)
      : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  fs::path file(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
};

} // namespace

TEST_CASE("a minimal config keeps every documented default") {
  const RunConfig cfg = parse_config("alpha = 0.05\n");
  CHECK(cfg.R == 1.0);
  CHECK(cfg.N == 2001);
  CHECK(cfg.m == 1.0);
  CHECK(cfg.omega == 0.5);
  CHECK(cfg.alpha == 0.05);
  CHECK(cfg.q_spec.kind == QSpec::Kind::Constant);
  CHECK(cfg.q_spec.args[0] == 1.0);
  CHECK_FALSE(cfg.q0.has_value());
  CHECK(cfg.grad_tol == 1e-8);
  CHECK(cfg.pde_tol == 1e-6);
  CHECK(cfg.singular_tol > 0.0);                       // resolved from volume
  CHECK(cfg.boundary_tol == 1e3 * cfg.singular_tol);   // resolved ratio
  CHECK(cfg.seed == 12345);
  CHECK(cfg.max_iter == 10000);
  CHECK(cfg.n_samples == 100);
  CHECK(cfg.deflation_rounds == 0);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
  const RunConfig cfg = parse_config(
      "# header comment\n"
      "\n"
      "  omega = 0.75   # inline comment\n"
      "\tN=301\n");
  CHECK(cfg.omega == 0.75);
  CHECK(cfg.N == 301);
}

TEST_CASE("unknown keys and malformed lines carry their line number") {
  try {
    parse_config("alpha = 0.05\nfrequency = 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("frequency") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("omega 0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_config("omega = \n"), ParseError);
  CHECK_THROWS_AS(parse_config("omega = fast\n"), ParseError);
  CHECK_THROWS_AS(parse_config("N = 2.5\n"), ParseError);
}

TEST_CASE("validation names the violated invariant") {
  CHECK_THROWS_AS(parse_config("N = 4\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("R = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("R = -2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("grad_tol = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("pde_tol = -1e-6\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("boundary_tol = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("singular_tol = -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("max_iter = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("n_samples = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("deflation_rounds = -1\n"), ValidationError);
  try {
    parse_config("N = 4\n");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("N >= 16") != std::string::npos);
  }
}

TEST_CASE("every q_spec form parses and instantiates") {
  SUBCASE("constant") {
    const RunConfig cfg = parse_config("N = 101\nq_spec = constant(2)\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.values[50] == 2.0);
    CHECK(prob.p.q.has_gap);
    CHECK(*prob.p.q.gap == 2.0);
  }
  SUBCASE("annulus with declared gap") {
    const RunConfig cfg = parse_config(
        "N = 101\nq_spec = annulus(0.25, 0.75, 3)\nq0 = 1\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.values[0] == 1.0);
    CHECK(prob.p.q.values[50] == 3.0);
    CHECK(prob.p.q.values[100] == 1.0);
    CHECK(prob.p.q.has_gap);
    CHECK(*prob.p.q.gap == 1.0);
  }
  SUBCASE("annulus infers the smallest level") {
    const RunConfig cfg =
        parse_config("N = 101\nq_spec = annulus(0.25, 0.75, 3)\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.has_gap);
    CHECK(*prob.p.q.gap == 1.0);
  }
  SUBCASE("step_with_gap") {
    const RunConfig cfg =
        parse_config("N = 101\nq_spec = step_with_gap(0.5, 2)\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.values[0] == 0.5);
    CHECK(prob.p.q.values[100] == 2.0);
    CHECK(prob.p.q.has_gap);
    CHECK(*prob.p.q.gap == 0.5);
  }
  SUBCASE("decay is gapless") {
    const RunConfig cfg = parse_config("N = 101\nq_spec = decay(1)\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.values[0] == 0.0);
    CHECK(prob.p.q.values[100] == doctest::Approx(1.0));
    CHECK_FALSE(prob.p.q.has_gap);
  }
  SUBCASE("table interpolates piecewise-linearly") {
    const RunConfig cfg =
        parse_config("N = 101\nq_spec = table(0:1, 0.5:2, 1:1)\n");
    const Problem prob = instantiate(cfg);
    CHECK(prob.p.q.values[0] == doctest::Approx(1.0));
    CHECK(prob.p.q.values[50] == doctest::Approx(2.0));
    CHECK(prob.p.q.values[25] == doctest::Approx(1.5));
    CHECK_FALSE(prob.p.q.has_gap);
  }
  SUBCASE("vanishing coupling is rejected at instantiation") {
    const RunConfig cfg = parse_config("N = 101\nq_spec = constant(0)\n");
    CHECK_THROWS_AS(instantiate(cfg), ValidationError);
  }
  SUBCASE("malformed grammar") {
    CHECK_THROWS_AS(parse_config("q_spec = constant\n"), ParseError);
    CHECK_THROWS_AS(parse_config("q_spec = constant()\n"), ParseError);
    CHECK_THROWS_AS(parse_config("q_spec = annulus(0.1, 0.9)\n"), ParseError);
    CHECK_THROWS_AS(parse_config("q_spec = wedge(1)\n"), ParseError);
    CHECK_THROWS_AS(parse_config("q_spec = table(0:1)\n"), ParseError);
    CHECK_THROWS_AS(parse_config("q_spec = table(0.5:1, 0.2:1)\n"),
                    ParseError);
  }
}

TEST_CASE("format_config round-trips every field") {
  RunConfig cfg = parse_config(
      "R = 1.5\nN = 333\nm = 1.25\nomega = -0.375\nalpha = 0.01\n"
      "q_spec = table(0:0.5, 0.7:1.25, 1.5:2)\nq0 = 0.5\n"
      "grad_tol = 1e-7\npde_tol = 1e-5\nseed = 99\nmax_iter = 123\n"
      "n_samples = 7\ndeflation_rounds = 2\noutput_dir = elsewhere\n");
  const std::string text = format_config(cfg);
  const RunConfig back = parse_config(text);
  CHECK(back.R == cfg.R);
  CHECK(back.N == cfg.N);
  CHECK(back.m == cfg.m);
  CHECK(back.omega == cfg.omega);
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.q_spec.kind == cfg.q_spec.kind);
  CHECK(back.q_spec.table == cfg.q_spec.table);
  CHECK(back.q0 == cfg.q0);
  CHECK(back.grad_tol == cfg.grad_tol);
  CHECK(back.pde_tol == cfg.pde_tol);
  CHECK(back.boundary_tol == cfg.boundary_tol);
  CHECK(back.singular_tol == cfg.singular_tol);
  CHECK(back.seed == cfg.seed);
  CHECK(back.max_iter == cfg.max_iter);
  CHECK(back.n_samples == cfg.n_samples);
  CHECK(back.deflation_rounds == cfg.deflation_rounds);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(format_config(back) == text);
}

TEST_CASE("solve_options carries the configured tolerances") {
  const RunConfig cfg = parse_config(
      "grad_tol = 1e-7\npde_tol = 1e-5\nsingular_tol = 1e-9\n"
      "boundary_tol = 1e-5\nmax_iter = 77\n");
  const SolveOptions opts = solve_options(cfg);
  CHECK(opts.grad_tol_scale == 1e-7);
  CHECK(opts.pde_tol == 1e-5);
  CHECK(opts.singular_tol == 1e-9);
  CHECK(opts.boundary_factor == doctest::Approx(1e4));
  CHECK(opts.max_iter == 77);
}

TEST_CASE("cmd_solve writes the summary and profiles deterministically") {
  const Scratch scratch("kgm_cfg_solve");
  const RunConfig cfg = parse_config("N = 301\nseed = 7\n");

  // One config, two runs: the promise is byte-identical output files, so
  // redirect through the environment instead of editing the config.
  setenv("KGM_OUTPUT_DIR", (scratch.root / "a").string().c_str(), 1);
  REQUIRE(cmd_solve(cfg) == 0);
  setenv("KGM_OUTPUT_DIR", (scratch.root / "b").string().c_str(), 1);
  REQUIRE(cmd_solve(cfg) == 0);
  unsetenv("KGM_OUTPUT_DIR");

  for (const char* name :
       {"summary.txt", "u.csv", "phi.csv", "xi.csv", "eta.csv", "theta.csv",
        "chi.csv"}) {
    const std::string a = slurp(scratch.root / "a" / name);
    const std::string b = slurp(scratch.root / "b" / name);
    CHECK_MESSAGE(a == b, std::string(name), " differs between identical runs");
    CHECK(a.size() > 0);
  }

  const std::string summary = slurp(scratch.root / "a" / "summary.txt");
  CHECK(summary.find("status = Converged") != std::string::npos);
  CHECK(summary.find("config:") != std::string::npos);
  CHECK(summary.find("N = 301") != std::string::npos);

  const std::string u_csv = slurp(scratch.root / "a" / "u.csv");
  CHECK(u_csv.substr(0, 8) == "r,value\n");
  CHECK(std::count(u_csv.begin(), u_csv.end(), '\n') == 302);
}

TEST_CASE("KGM_OUTPUT_DIR overrides the configured directory") {
  const Scratch scratch("kgm_cfg_env");
  RunConfig cfg = parse_config("N = 301\n");
  cfg.output_dir = (scratch.root / "ignored").string();

  const fs::path forced = scratch.root / "forced";
  setenv("KGM_OUTPUT_DIR", forced.string().c_str(), 1);
  const int rc = cmd_solve(cfg);
  unsetenv("KGM_OUTPUT_DIR");

  CHECK(rc == 0);
  CHECK(fs::exists(forced / "summary.txt"));
  CHECK_FALSE(fs::exists(scratch.root / "ignored"));
}

TEST_CASE("cmd_verify reports and returns success on the reference setup") {
  const Scratch scratch("kgm_cfg_verify");
  RunConfig cfg = parse_config("N = 301\nn_samples = 5\nseed = 3\n");
  cfg.output_dir = scratch.root.string();
  CHECK(cmd_verify(cfg) == 0);
  const std::string report = slurp(scratch.root / "verify_report.txt");
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("PASS") != std::string::npos);
  CHECK(report.find("totals:") != std::string::npos);
}

TEST_CASE("cmd_experiment dispatches and rejects unknown names") {
  const Scratch scratch("kgm_cfg_exp");
  RunConfig cfg = parse_config("N = 301\n");
  cfg.output_dir = scratch.root.string();
  CHECK(cmd_experiment("blowup", cfg) == 0);
  CHECK(fs::exists(scratch.root / "experiment_blowup.txt"));
  CHECK_THROWS_AS(cmd_experiment("melt", cfg), std::invalid_argument);
}

TEST_CASE("cmd_sweep tabulates one row per value") {
  const Scratch scratch("kgm_cfg_sweep");
  RunConfig cfg = parse_config("N = 151\n");
  cfg.output_dir = scratch.root.string();
  CHECK(cmd_sweep(cfg, "omega", {0.0, 0.5}) == 0);
  const std::string csv = slurp(scratch.root / "sweep.csv");
  CHECK(csv.find("value,j_star,status\n") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("Converged") != std::string::npos);
  CHECK_THROWS_AS(cmd_sweep(cfg, "radius", {1.0}), std::invalid_argument);
}

TEST_CASE("load_config reads files and rejects missing ones") {
  const Scratch scratch("kgm_cfg_load");
  const fs::path p = scratch.file("run.cfg", "omega = 0.25\n");
  CHECK(load_config(p.string()).omega == 0.25);
  CHECK_THROWS((void)load_config((scratch.root / "absent.cfg").string()));
}
