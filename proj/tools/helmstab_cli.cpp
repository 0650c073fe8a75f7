// helmstab command line: one subcommand per lab stage, JSON config in, CSV/JSON out.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "helmstab/experiment.hpp"
#include "helmstab/fieldio.hpp"
#include "json.hpp"

using namespace helmstab;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
};

ExperimentConfig load(const Common& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  c.solver.seed = c.seed;
  if (o.threads > 0) c.threads = o.threads;
  if (!o.out.empty()) c.out = o.out;
  c.validate();
  std::filesystem::create_directories(c.out);
  return c;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << "\n";
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// one entry per unit of work; the exit code is 0 only if all of them are ok
struct Outcome {
  json entries = json::array();
  bool ok = true;
  void failure(json e, const Error& ex) {
    e["ok"] = false;
    e["error_kind"] = ex.kind();
    e["error_message"] = ex.what();
    entries.push_back(std::move(e));
    ok = false;
  }
  void success(json e) {
    e["ok"] = true;
    entries.push_back(std::move(e));
  }
};

std::string lam_stem(const ExperimentConfig& c, const std::string& what, std::size_t li) {
  return c.out + "/" + what + "_lambda" + std::to_string(li);
}

TraceBasisPtr basis_for(const ExperimentConfig& c, GeometryPtr g) {
  return build_trace_basis(g, g->gamma_mask(), c.basis_size, c.variant == Variant::impedance ? 0.5 : 1.5);
}

// plane wave exp(i sqrt(lambda) x1) on the boundary as the datum
ComplexField plane_wave_trace(GeometryPtr g, double lambda) {
  const double k = std::sqrt(std::max(lambda, 0.0));
  return boundary_from_function_c(g, [k](const Vec3& x) { return std::exp(Complex(0, k * x[0])); });
}

int cmd_forward(const Common& o) {
  const ExperimentConfig c = load(o);
  const GeometryPtr g = build_geometry(c.geometry);
  const PotentialPair p = make_potentials(c, g);
  Outcome res;
  for (std::size_t li = 0; li < c.lambdas.size(); ++li) {
    const double lam = c.lambdas[li];
    json e{{"lambda", lam}, {"variant", variant_name(c.variant)}};
    try {
      const ComplexField phi = plane_wave_trace(g, lam);
      const ComplexField f(g, Support::interior);
      ComplexField u;
      if (c.variant == Variant::impedance) {
        const RobinSolver rs(p.q1, lam, ImpedanceParams::constant(*g, c.impedance_a, c.impedance_sign, c.lambda0),
                             c.solver);
        const RobinSolution s = rs.solve(f, phi);
        const auto [ri, rb] = rs.residuals(s, f.values, phi.values);
        e["residual_interior"] = ri;
        e["residual_robin"] = rb;
        u = s.interior;
        write_field(lam_stem(c, "trace", li), s.trace, "trace");
      } else {
        const DirichletSolver ds(p.q1, lam, c.solver);
        u = ds.solve(f, phi);
        e["residual_interior"] = ds.residual(u.values, f.values, phi.values).norm();
        e["resolvent_lower_bound"] = ds.resolvent_lower_bound();
        e["probe_eigenvalue"] = ds.probe_eigenvalue();
      }
      e["l2_norm"] = l2_norm(u);
      write_field(lam_stem(c, "solution", li), u, "solution");
      res.success(e);
    } catch (const Error& ex) {
      res.failure(e, ex);
    }
  }
  write_json(c.out + "/forward.json", {{"config", json::parse(config_to_json(c))}, {"runs", res.entries}});
  return res.ok ? 0 : 1;
}

int cmd_dtn(const Common& o) {
  const ExperimentConfig c = load(o);
  const GeometryPtr g = build_geometry(c.geometry);
  const PotentialPair p = make_potentials(c, g);
  const TraceBasisPtr basis = basis_for(c, g);
  Outcome res;
  for (std::size_t li = 0; li < c.lambdas.size(); ++li) {
    const double lam = c.lambdas[li];
    json e{{"lambda", lam}, {"variant", variant_name(c.variant)}, {"basis_hash", basis->hash}};
    try {
      BoundaryMap m1, m2;
      if (c.variant == Variant::impedance) {
        const ImpedanceParams par = ImpedanceParams::constant(*g, c.impedance_a, c.impedance_sign, c.lambda0);
        m1 = assemble_rtd(p.q1, lam, par, basis, c.solver);
        m2 = assemble_rtd(p.q2, lam, par, basis, c.solver);
      } else {
        m1 = assemble_dtn(DirichletSolver(p.q1, lam, c.solver), basis, c.threads);
        m2 = assemble_dtn(DirichletSolver(p.q2, lam, c.solver), basis, c.threads);
      }
      const BoundaryMap d = map_difference(m1, m2);
      export_map(lam_stem(c, "map_q1", li), m1);
      export_map(lam_stem(c, "map_q2", li), m2);
      export_map(lam_stem(c, "map_diff", li), d);
      e["norm_q1"] = operator_norm(m1);
      e["norm_q2"] = operator_norm(m2);
      e["delta_map"] = operator_norm(d);
      e["rows"] = d.rows();
      e["cols"] = d.cols();
      res.success(e);
    } catch (const Error& ex) {
      res.failure(e, ex);
    }
  }
  write_json(c.out + "/dtn.json", {{"config", json::parse(config_to_json(c))}, {"maps", res.entries}});
  return res.ok ? 0 : 1;
}

int cmd_cgo(const Common& o, const std::vector<double>& eta_in) {
  const ExperimentConfig c = load(o);
  const GeometryPtr g = build_geometry(c.geometry);
  const PotentialPair p = make_potentials(c, g);
  const Vec3 eta{eta_in[0], eta_in[1], eta_in[2]};
  Outcome res;
  std::ofstream csv(c.out + "/cgo.csv");
  csv << "lambda,tau,im_xi,iterations,residual,w_norm,w_times_im_xi,u_norm,remainder_l1,identity_defect,faddeev_l2,faddeev_h2\n";
  char line[512];
  for (double lam : c.lambdas) {
    std::vector<double> im, un;
    for (double tau : c.taus) {
      json e{{"lambda", lam}, {"tau", tau}};
      try {
        const auto [s1, s2] = solve_cgo_pair(p.q1, p.q2, make_frequency_pair(eta, tau, lam), c.cgo);
        const ProductRemainder pr = cgo_product_remainder(s1, s2);
        for (const CgoSolution* s : {&s1, &s2}) {
          std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", lam, tau,
                        s->im_xi, s->iterations, s->residual, s->w_norm_X, s->w_times_im_xi(), s->u_norm_X,
                        pr.l1_omega0, pr.identity_defect, 1.0 / s->min_symbol, s->h2_gain);
          csv << line;
        }
        im.push_back(s1.im_xi);
        un.push_back(s1.u_norm_X);
        e["iterations"] = std::max(s1.iterations, s2.iterations);
        e["residual"] = std::max(s1.residual, s2.residual);
        e["w_times_im_xi"] = std::max(s1.w_times_im_xi(), s2.w_times_im_xi());
        res.success(e);
      } catch (const Error& ex) {
        res.failure(e, ex);
      }
    }
    if (im.size() >= 2) res.entries.push_back({{"lambda", lam}, {"varkappa_fit", num(fit_varkappa(im, un))}});
  }
  write_json(c.out + "/cgo.json", {{"config", json::parse(config_to_json(c))},
                                   {"eta", {eta[0], eta[1], eta[2]}},
                                   {"solves", res.entries}});
  return res.ok ? 0 : 1;
}

int cmd_runge(const Common& o, int points, double tmin) {
  const ExperimentConfig c = load(o);
  const GeometryPtr g = build_geometry(c.geometry);
  const PotentialPair p = make_potentials(c, g);
  const TraceBasisPtr basis = build_trace_basis(g, g->gamma_mask(), c.basis_size, 1.5);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) grid.push_back(std::pow(10.0, std::log10(tmin) * (1.0 - i / (points - 1.0))));
  Outcome res;
  for (std::size_t li = 0; li < c.lambdas.size(); ++li) {
    const double lam = c.lambdas[li];
    json e{{"lambda", lam}};
    try {
      const DirichletSolver ds(p.q1, lam, c.solver);
      const RungeOperator op = assemble_runge_operator(ds, basis);
      // target: the eta = 0 CGO of q1, a local solution near Omega0
      const CgoSolution s =
          solve_cgo_pair(p.q1, p.q1, make_frequency_pair({0, 0, 0}, c.taus.front(), lam), c.cgo).first;
      const CVec box = s.interior_values();
      const auto& o0 = g->omega0_nodes();
      CVec u0(static_cast<Eigen::Index>(o0.size()));
      for (std::size_t i = 0; i < o0.size(); ++i) u0[static_cast<Eigen::Index>(i)] = box[static_cast<Eigen::Index>(o0[i])];
      const auto curve = runge_tradeoff_curve(op, u0, grid);
      write_tradeoff_csv(lam_stem(c, "tradeoff", li) + ".csv", curve);
      e["singular_values"] = std::vector<double>(op.sigma.data(), op.sigma.data() + op.sigma.size());
      e["target_tau"] = c.taus.front();
      e["target_norm"] = std::sqrt(std::pow(g->h(), 3)) * u0.norm();
      res.success(e);
    } catch (const Error& ex) {
      res.failure(e, ex);
    }
  }
  write_json(c.out + "/runge.json", {{"config", json::parse(config_to_json(c))}, {"runs", res.entries}});
  return res.ok ? 0 : 1;
}

int run_records(const Common& o, int which) {
  ExperimentConfig c = load(o);
  if (which == 2) {
    c.dump_fields = true;
    c.dump_qhat = true;
  }
  const ExperimentResult r = which == 1 ? run_impedance_experiment(c)
                             : which == 0 ? run_stability_experiment(c)
                                          : run_experiment(c);
  write_experiment(c.out, r);
  int failed = 0;
  for (const auto& rec : r.records) failed += rec.ok ? 0 : 1;
  std::printf("%zu records, %d failed, written to %s\n", r.records.size(), failed, c.out.c_str());
  return r.all_ok() ? 0 : 1;
}

int cmd_fit(const std::string& input, const std::string& x, const std::string& y, const std::string& mode,
            const std::string& out) {
  const Table t = read_csv_table(input);
  const FitResult f = fit_scaling(t.column(x), t.column(y), parse_fit_mode(mode));
  const json j{{"input", input}, {"x", x},           {"y", y},
               {"mode", mode},   {"slope", num(f.slope)}, {"intercept", num(f.intercept)},
               {"stderr_slope", num(f.stderr_slope)}, {"points", f.points}};
  std::printf("slope %.6g +- %.2g intercept %.6g (%d points)\n", f.slope, f.stderr_slope, f.intercept, f.points);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_json(out + "/fit.json", j);
  }
  return f.points >= 2 && std::isfinite(f.slope) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"helmstab: numerical lab for inverse Helmholtz potential stability"};
  app.require_subcommand(1);
  Common o;
  app.add_option("--seed", o.seed, "RNG seed (overrides the config)");
  app.add_option("--out", o.out, "output directory (overrides the config)");
  app.add_option("--threads", o.threads, "worker threads (overrides the config)");

  auto with_config = [&](CLI::App* s) { s->add_option("config", o.config, "JSON config")->check(CLI::ExistingFile); };
  auto* forward = app.add_subcommand("forward", "solve the forward problem for q1 with plane-wave data");
  auto* dtn = app.add_subcommand("dtn", "assemble and export the boundary maps of q1, q2 and their difference");
  auto* cgo = app.add_subcommand("cgo", "CGO solves over the tau list");
  auto* runge = app.add_subcommand("runge", "Runge tradeoff curves for a CGO target");
  auto* recon = app.add_subcommand("reconstruct", "q-hat tables and low-pass reconstructions");
  auto* stab = app.add_subcommand("stability", "Dirichlet stability sweep");
  auto* imp = app.add_subcommand("impedance", "impedance stability sweep");
  auto* fit = app.add_subcommand("fit", "scaling fit of two record columns");
  for (auto* s : {forward, dtn, cgo, runge, recon, stab, imp}) with_config(s);

  std::vector<double> eta{0, 0, 0};
  cgo->add_option("--eta", eta, "frequency eta")->expected(3);
  int points = 13;
  double tmin = 1e-12;
  runge->add_option("--points", points, "grid points")->check(CLI::Range(2, 1000));
  runge->add_option("--tmin", tmin, "smallest threshold")->check(CLI::PositiveNumber);
  std::string input, fx = "lambda", fy = "herr", fmode = "loglog";
  fit->add_option("input", input, "records CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--x", fx, "x column");
  fit->add_option("--y", fy, "y column");
  fit->add_option("--mode", fmode, "loglog, semilogy, semilogx or linear");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*forward) return cmd_forward(o);
    if (*dtn) return cmd_dtn(o);
    if (*cgo) return cmd_cgo(o, eta);
    if (*runge) return cmd_runge(o, points, tmin);
    if (*recon) return run_records(o, 2);
    if (*stab) return run_records(o, 0);
    if (*imp) return run_records(o, 1);
    if (*fit) return cmd_fit(input, fx, fy, fmode, o.out);
  } catch (const Error& ex) {
    std::fprintf(stderr, "%s error: %s\n", ex.kind(), ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;
}
