// Command-line surface: one experiment per process, results under a
// config-hash directory.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "llmag/io.hpp"

namespace llmag {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out, scheme, axis, initial, field_axis, form;
  std::optional<int> dim, nx, ny, nz, field_steps;
  std::optional<double> k, T, alpha, beta, h_max_mT;
  std::optional<unsigned long> seed;
  std::optional<long> max_steps;
  bool project = false, no_project = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_path, "config file ([grid] [material] [scheme] [experiment] [output])");
  app->add_option("-o,--out", o.out, "base output directory");
  app->add_option("-s,--scheme", o.scheme, "imexrk2 | imexrk3 | ssp | bdf2 | bdf2ld");
  app->add_option("--dim", o.dim, "1 or 3");
  app->add_option("--nx", o.nx);
  app->add_option("--ny", o.ny);
  app->add_option("--nz", o.nz);
  app->add_option("-k,--k", o.k, "time step (dimensionless)");
  app->add_option("-T,--T", o.T, "final time");
  app->add_option("--alpha", o.alpha);
  app->add_option("--beta", o.beta);
  app->add_option("--seed", o.seed);
  app->add_option("--form", o.form, "equivalent | cross");
  app->add_flag("--project", o.project, "project onto |m| = 1 after each step");
  app->add_flag("--no-project", o.no_project);
}

// Kind-specific defaults, then the config file, then flags.
RunConfig resolve(const std::string& kind, const Overrides& o) {
  RunConfig c;
  c.kind = kind;
  if (kind == "relax" || kind == "hysteresis") {
    c.dim = 3;
    c.n = {32, 64, 1};
    c.extent = {0.5, 1.0, 0.01};
    c.physical = true;
    c.alpha = 0.1;
    c.beta = 3.0;
    c.project = true;
    c.forcing = false;
    c.exchange = c.anisotropy = c.demag = c.zeeman = true;
    c.k = 1e-12 / c.material().time_unit_seconds();
    c.max_steps = 200000;
    if (kind == "hysteresis") {
      c.n = {25, 50, 1};
      c.max_steps = 20000;
    }
  }
  // Manufactured runs: the explicit gyromagnetic term limits how many steps
  // a fine grid tolerates, so the defaults use a short horizon.
  if (kind == "converge") {
    c.n = {400, 1, 1};
    c.T = 1e-3;
    c.k = 2e-4;
  }
  if (kind == "bench") {
    c.n = {200, 1, 1};
    c.T = 1e-3;
    c.k = 2e-4;
  }
  if (kind == "beta-sweep") {
    c.dim = 3;
    c.n = {4, 4, 4};
    c.k = 1.0 / 2000;
  }
  if (kind == "stability") {
    c.dim = 3;
    c.n = {8, 8, 8};
    c.scheme = SchemeId::SSPIMEXRK2;
    c.forcing = false;
    c.seed = 12345;
  }
  if (!o.config_path.empty()) {
    c = parse_config(read_file(o.config_path), c);
    require(c.kind == kind, "config: experiment.kind is '" + c.kind + "' but the subcommand is '" + kind + "'");
  }
  if (o.out) c.output_dir = *o.out;
  if (o.scheme) c.scheme = parse_scheme(*o.scheme);
  if (o.dim) {
    c.dim = *o.dim;
    if (c.dim == 1) c.n[1] = c.n[2] = 1;
  }
  if (o.nx) c.n[0] = *o.nx;
  if (o.ny) c.n[1] = *o.ny;
  if (o.nz) c.n[2] = *o.nz;
  if (o.k) c.k = *o.k;
  if (o.T) c.T = *o.T;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  if (o.seed) c.seed = *o.seed;
  if (o.form) {
    require(*o.form == "equivalent" || *o.form == "cross", "--form must be equivalent or cross");
    c.form = *o.form == "equivalent" ? RhsForm::Equivalent : RhsForm::CrossProduct;
  }
  if (o.project) c.project = true;
  if (o.no_project) c.project = false;
  if (o.axis) {
    if (*o.axis == "temporal") c.axis = SweepAxis::Temporal;
    else if (*o.axis == "spatial") c.axis = SweepAxis::Spatial;
    else if (*o.axis == "coupled") c.axis = SweepAxis::Coupled;
    else throw ValidationError("--axis must be temporal, spatial or coupled");
  }
  if (o.initial) c.initial = *o.initial;
  if (o.field_axis) c.field_axis = *o.field_axis;
  if (o.field_steps) c.field_steps = *o.field_steps;
  if (o.h_max_mT) c.h_max_mT = *o.h_max_mT;
  if (o.max_steps) c.max_steps = *o.max_steps;
  c.validate();
  return c;
}

fs::path prepare(const RunConfig& c) {
  const fs::path dir = run_directory(c);
  fs::create_directories(dir);
  atomic_write(dir / "manifest", to_text(c));
  return dir;
}

ManufacturedRun manufactured_base(const RunConfig& c) {
  require(c.physical == false, "converge: the manufactured problem is dimensionless (eps = 1)");
  ManufacturedRun r;
  r.scheme = c.scheme;
  r.dim = c.dim;
  r.h = 1.0 / c.n[0];
  r.k = c.k;
  r.T = c.T;
  r.alpha = c.alpha;
  r.beta = c.beta;
  r.project = c.project;
  r.form = c.form;
  r.gmres = c.gmres;
  return r;
}

std::string error_table(const ErrorReport& rep) {
  CsvTable t;
  t.header = {"k", "h", "linf", "l2", "h1"};
  for (const auto& s : rep.samples) t.add({s.k, s.h, s.linf, s.l2, s.h1});
  // fewer than 3 samples: no fit
  if (rep.samples.size() < 3)
    t.rows.push_back({"order", "", "", "", ""});
  else
    t.rows.push_back({"order", "", fmt_double(rep.order_linf), fmt_double(rep.order_l2), fmt_double(rep.order_h1)});
  return t.str();
}

int run_converge(const RunConfig& c, std::vector<double> ks, std::vector<int> ns, double coupled_c) {
  ConvergenceSpec spec;
  spec.base = manufactured_base(c);
  spec.axis = c.axis;
  switch (c.axis) {
    case SweepAxis::Temporal:
      if (ks.empty())
        for (double d : {1.0, 2.0, 3.0, 4.0, 5.0}) ks.push_back(c.k / d);
      for (double k : ks) spec.kh.emplace_back(k, spec.base.h);
      break;
    case SweepAxis::Spatial:
      if (ns.empty()) ns = {25, 50, 100, 200};
      for (int n : ns) spec.kh.emplace_back(c.k, 1.0 / n);
      break;
    case SweepAxis::Coupled: {
      if (ns.empty()) ns = {3, 4, 5, 6};
      std::vector<double> hs;
      for (int n : ns) hs.push_back(1.0 / n);
      spec.kh = coupled_pairs(coupled_c, hs);
      break;
    }
  }
  const ErrorReport rep = convergence_study(spec);
  const fs::path dir = prepare(c);
  const std::string csv = error_table(rep);
  atomic_write(dir / "converge.csv", csv);
  std::cout << csv;
  for (const auto& s : rep.samples) std::cerr << "k=" << s.k << " h=" << s.h << " " << s.seconds << " s\n";
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int run_beta_sweep(const RunConfig& c, std::vector<double> betas, std::vector<double> alphas) {
  if (betas.empty()) betas = {1, 3, 4};
  if (alphas.empty()) alphas = {0.001, 0.01};
  const auto entries = beta_sweep(manufactured_base(c), betas, alphas);
  CsvTable t;
  t.header = {"beta", "alpha", "k", "h", "linf", "l2", "h1"};
  for (const auto& e : entries)
    t.add({e.beta, e.alpha, e.sample.k, e.sample.h, e.sample.linf, e.sample.l2, e.sample.h1});
  const fs::path dir = prepare(c);
  atomic_write(dir / "beta_sweep.csv", t.str());
  std::cout << t.str() << "spread," << fmt_double(beta_sweep_spread(entries)) << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int run_stability(const RunConfig& c, std::vector<double> ratios, int trials, int steps) {
  StabilitySpec spec;
  spec.grid = c.grid();
  spec.beta = c.beta;
  if (!ratios.empty()) spec.k_over_h2 = ratios;
  spec.trials = trials;
  spec.n_steps = steps;
  spec.seed = c.seed;
  const StabilityReport r = stability_probe(spec);
  std::ostringstream os;
  os << "key,value\n"
     << "checks," << r.checks << "\n"
     << "per_step_violations," << r.per_step_violations << "\n"
     << "worst_per_step," << fmt_double(r.worst_per_step) << "\n"
     << "cumulative_violations," << r.cumulative_violations << "\n"
     << "worst_cumulative," << fmt_double(r.worst_cumulative) << "\n"
     << "cumulative_sq_violations," << r.cumulative_sq_violations << "\n"
     << "worst_cumulative_sq," << fmt_double(r.worst_cumulative_sq) << "\n"
     << "norm_increases," << r.norm_increases << "\n";
  const fs::path dir = prepare(c);
  atomic_write(dir / "stability.csv", os.str());
  std::cout << os.str();
  if (!r.first_violation.empty()) std::cout << "first violation: " << r.first_violation << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

SimConfig sim_config(const RunConfig& c) {
  require(c.dim == 3, "relax/hysteresis need grid.dim = 3");
  SimConfig s;
  s.grid = c.grid();
  s.params = c.material();
  s.scheme = c.scheme;
  s.k = c.k;
  s.k_physical = false;
  s.project = c.project;
  s.anisotropy = c.anisotropy;
  s.steady_tol = c.steady_tol;
  s.max_steps = c.max_steps;
  return s;
}

int run_relax(const RunConfig& c) {
  const SimConfig s = sim_config(c);
  const VectorField3 m0 = initial_state(s.grid, parse_initial_state(c.initial));
  const RelaxResult r = relax(s, m0, c.zeeman ? c.h_ext : Vec3{});
  CsvTable t;
  t.header = {"step", "t", "E_exchange", "E_anis", "E_demag", "E_zeeman", "E_total"};
  for (const auto& e : r.trace)
    t.add({static_cast<double>(e.step), e.t, e.e.exchange, e.e.anisotropy, e.e.demag, e.e.zeeman, e.e.total()});
  const fs::path dir = prepare(c);
  atomic_write(dir / "energy.csv", t.str());
  write_snapshot(s.grid.dim == 3 ? r.m : r.m, r.trace.empty() ? 0.0 : r.trace.back().t, dir / "m_final.llmf");
  const Vec3 mean = mean_magnetization(r.m);
  std::cout << "steps " << r.steps << (r.converged ? " converged" : " not converged") << "\n"
            << "E_total " << fmt_double(r.final_energy) << "\n"
            << "<m> " << fmt_double(mean.x) << " " << fmt_double(mean.y) << " " << fmt_double(mean.z) << "\n"
            << "wrote " << dir.string() << "\n";
  return r.converged ? 0 : 2;
}

int run_hysteresis(RunConfig c, bool paper_scale) {
  if (paper_scale) {
    c.n = {50, 100, 1};
    c.field_steps = 200;
  }
  const SimConfig s = sim_config(c);
  LoopConfig loop;
  loop.field_axis = c.field_axis == "x" ? LoopAxis::X : LoopAxis::Y;
  loop.canting_deg = c.canting_deg;
  loop.h_max_mT = c.h_max_mT;
  loop.n_steps = c.field_steps;
  loop.steady_tol = c.steady_tol;
  loop.max_steps_per_field = c.max_steps;
  const LoopResult r = hysteresis(loop, s, [](const LoopSample& smp, bool desc) {
    std::cerr << (desc ? "down " : "up   ") << smp.H_mT << " mT  <m> = " << smp.mean.x << " " << smp.mean.y << " "
              << smp.mean.z << "  (" << smp.steps << " steps)\n";
  });
  CsvTable t;
  t.header = {"branch", "H_mT", "mx", "my", "mz", "steps", "converged"};
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& smp : pass == 0 ? r.descending : r.ascending)
      t.rows.push_back({pass == 0 ? "down" : "up", fmt_double(smp.H_mT), fmt_double(smp.mean.x),
                        fmt_double(smp.mean.y), fmt_double(smp.mean.z), std::to_string(smp.steps),
                        smp.converged ? "1" : "0"});
  const fs::path dir = prepare(c);
  atomic_write(dir / "loop.csv", t.str());
  std::cout << "coercivity_mT " << fmt_double(r.coercivity()) << " (down " << fmt_double(r.coercive_desc_mT)
            << ", up " << fmt_double(r.coercive_asc_mT) << ")\n"
            << "unconverged_fields " << r.unconverged_fields << "\n"
            << "wrote " << dir.string() << "\n";
  return 0;
}

int run_bench(const RunConfig& c, std::vector<double> ks, std::vector<std::string> schemes) {
  EfficiencySpec spec;
  spec.dim = c.dim;
  spec.h = 1.0 / c.n[0];
  spec.T = c.T;
  spec.alpha = c.alpha;
  spec.beta = c.beta;
  spec.gmres = c.gmres;
  if (ks.empty())
    for (double d : {1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0}) ks.push_back(c.k / d);
  spec.ks = ks;
  spec.repeats = 5;
  if (!schemes.empty()) {
    spec.schemes.clear();
    for (const auto& s : schemes) spec.schemes.push_back(parse_scheme(s));
  }
  const auto curves = efficiency_bench(spec);
  CsvTable t;
  t.header = {"scheme", "k", "h", "linf", "seconds"};
  for (const auto& cv : curves)
    for (const auto& s : cv.samples)
      t.rows.push_back({scheme_name(cv.scheme), fmt_double(s.k), fmt_double(s.h), fmt_double(s.linf),
                        fmt_double(s.seconds)});
  const fs::path dir = prepare(c);
  atomic_write(dir / "bench.csv", t.str());
  std::cout << t.str() << "wrote " << dir.string() << "\n";
  return 0;
}

void print_matrix(std::ostream& os, const std::string& name, const std::vector<double>& a, int s) {
  os << name << " =\n";
  for (int i = 0; i < s; ++i) {
    os << " ";
    for (int j = 0; j < s; ++j) os << " " << fmt_double(a[static_cast<std::size_t>(i * s + j)]);
    os << "\n";
  }
}

void print_vector(std::ostream& os, const std::string& name, const std::vector<double>& v) {
  os << name << " =";
  for (double x : v) os << " " << fmt_double(x);
  os << "\n";
}

int run_dump_tableau(const std::string& scheme) {
  const SchemeId id = parse_scheme(scheme);
  require(is_imex(id), "dump-tableau: " + scheme_name(id) + " is a multistep scheme without a tableau");
  const ButcherPair t = builtin_tableau(id);
  std::cout << scheme_name(id) << " (s = " << t.s << ")\n";
  print_vector(std::cout, "c", t.c);
  print_matrix(std::cout, "A_implicit", t.A_im, t.s);
  print_vector(std::cout, "b_implicit", t.b_im);
  print_matrix(std::cout, "A_explicit", t.A_ex, t.s);
  print_vector(std::cout, "b_explicit", t.b_ex);
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"llmag: finite-difference Landau-Lifshitz solver"};
  app.require_subcommand(1);

  Overrides o;
  std::vector<double> ks, betas, alphas, ratios;
  std::vector<int> ns;
  std::vector<std::string> schemes;
  double coupled_c = 1e-3;
  int trials = 100, stab_steps = 50;
  bool paper_scale = false;
  std::string tab_scheme = "imexrk2";

  auto* conv = app.add_subcommand("converge", "convergence table for the manufactured solution");
  add_common(conv, o);
  conv->add_option("--axis", o.axis, "temporal | spatial | coupled");
  conv->add_option("--ks", ks, "time steps for a temporal sweep")->delimiter(',');
  conv->add_option("--ns", ns, "cells per unit length for spatial or coupled sweeps")->delimiter(',');
  conv->add_option("--coupled-c", coupled_c, "k = c h^(2/3) for the coupled sweep");

  auto* beta = app.add_subcommand("beta-sweep", "error of the manufactured run across beta and alpha");
  add_common(beta, o);
  beta->add_option("--betas", betas)->delimiter(',');
  beta->add_option("--alphas", alphas)->delimiter(',');

  auto* stab = app.add_subcommand("stability", "energy-inequality probe on random fields");
  add_common(stab, o);
  stab->add_option("--ratios", ratios, "k / h^2 values")->delimiter(',');
  stab->add_option("--trials", trials);
  stab->add_option("--steps", stab_steps);

  auto* rel = app.add_subcommand("relax", "relax a thin film to a steady state");
  add_common(rel, o);
  rel->add_option("--initial", o.initial, "landau | c_state | s_state | uniform");
  rel->add_option("--max-steps", o.max_steps);

  auto* hys = app.add_subcommand("hysteresis", "field-sweep hysteresis loop of a thin film");
  add_common(hys, o);
  hys->add_option("--field-axis", o.field_axis, "x | y");
  hys->add_option("--field-steps", o.field_steps);
  hys->add_option("--h-max", o.h_max_mT, "field amplitude in mT");
  hys->add_option("--max-steps", o.max_steps, "per field value");
  hys->add_flag("--full-scale,--paper-scale", paper_scale, "50 x 100 cells, 200 field steps");

  auto* bench = app.add_subcommand("bench", "wall time against error for several schemes");
  add_common(bench, o);
  bench->add_option("--ks", ks)->delimiter(',');
  bench->add_option("--schemes", schemes)->delimiter(',');

  auto* dump = app.add_subcommand("dump-tableau", "print the coefficient arrays of an IMEX scheme");
  dump->add_option("-s,--scheme", tab_scheme);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (dump->parsed()) return run_dump_tableau(tab_scheme);
    if (conv->parsed()) return run_converge(resolve("converge", o), ks, ns, coupled_c);
    if (beta->parsed()) return run_beta_sweep(resolve("beta-sweep", o), betas, alphas);
    if (stab->parsed()) return run_stability(resolve("stability", o), ratios, trials, stab_steps);
    if (rel->parsed()) return run_relax(resolve("relax", o));
    if (hys->parsed()) return run_hysteresis(resolve("hysteresis", o), paper_scale);
    if (bench->parsed()) return run_bench(resolve("bench", o), ks, schemes);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace llmag
