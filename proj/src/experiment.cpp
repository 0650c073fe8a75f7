#include "helmstab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "helmstab/fieldio.hpp"
#include "json.hpp"

namespace helmstab {

namespace {

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LambdaContext {
  const ExperimentConfig* cfg;
  GeometryPtr g;
  const PotentialPair* pots;
  RealField dq;
  CVec exact;  // Fourier coefficients of dq on the H^-1 torus
  double dq_norm = 0.0;
};

void fail(StabilityRecord& r, const std::string& kind, const std::string& what) {
  r.ok = false;
  r.error_kind = kind;
  r.error_message = what;
}

double triple_log_x(double delta_inj, double theta, int n) {
  if (!(delta_inj > 0.0)) return kNaN;
  const double lr = -theta * std::log(delta_inj);
  if (!(lr > std::exp(1.0))) return kNaN;
  return std::pow(triple_log_from_log(lr), -2.0 / (n + 2.0));
}

std::vector<StabilityRecord> run_lambda(const LambdaContext& ctx, int li, nlohmann::json& diag) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const GeometryPtr g = ctx.g;
  const double lambda = cfg.lambdas[static_cast<std::size_t>(li)];
  const bool imp = cfg.variant == Variant::impedance;
  const auto t_start = Clock::now();

  std::vector<StabilityRecord> recs(cfg.levels.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    recs[k].variant = variant_name(cfg.variant);
    recs[k].lambda_index = li;
    recs[k].level_index = static_cast<int>(k);
    recs[k].lambda = lambda;
    recs[k].level = cfg.levels[k];
    recs[k].b_lambda = b_lambda(lambda);
    recs[k].dq_norm = ctx.dq_norm;
    recs[k].e_lambda = kNaN;
    recs[k].distance = kNaN;
  }

  // ---- per-lambda setup: solvers, spectrum, maps, noise, varkappa
  std::shared_ptr<const BoundaryOperator> diff_op;
  std::shared_ptr<const RobinSolver> robin1;
  std::shared_ptr<const RungeOperator> runge1, runge2;
  std::shared_ptr<const NoiseOperator> noise;
  BoundaryMap dmap;
  double e = kNaN, dist = kNaN, varkappa = cfg.schedule.varkappa;
  bool admissible = true;
  const MapKind kind = imp ? MapKind::rtd : MapKind::dtn;
  try {
    const double s_in = imp ? 0.5 : 1.5;
    const TraceBasisPtr basis = build_trace_basis(g, g->gamma_mask(), cfg.basis_size, s_in);
    if (!imp) {
      auto d1 = std::make_shared<const DirichletSolver>(ctx.pots->q1, lambda, cfg.solver);
      auto d2 = std::make_shared<const DirichletSolver>(ctx.pots->q2, lambda, cfg.solver);
      const SpectralWindow w1 = eigenpairs_near(ctx.pots->q1, lambda, cfg.spectral_window);
      const SpectralWindow w2 = eigenpairs_near(ctx.pots->q2, lambda, cfg.spectral_window);
      e = e_lambda(lambda, {w1, w2});
      dist = std::min(w1.distance, w2.distance);
      admissible = in_admissible_class(ctx.pots->q1, ctx.pots->q2, w2.distance, cfg.kappa0);
      dmap = map_difference(assemble_dtn(*d1, basis), assemble_dtn(*d2, basis));
      diff_op = std::make_shared<DifferenceOperator>(std::make_shared<DtnOperator>(d1), std::make_shared<DtnOperator>(d2));
      if (cfg.qhat_mode == QhatMode::runge) {
        runge1 = std::make_shared<const RungeOperator>(assemble_runge_operator(*d1, basis));
        runge2 = std::make_shared<const RungeOperator>(assemble_runge_operator(*d2, basis));
      }
      diag["eigenvalues_q1"] = w1.eigenvalues;
      diag["eigenvalues_q2"] = w2.eigenvalues;
    } else {
      const ImpedanceParams par = ImpedanceParams::constant(*g, cfg.impedance_a, cfg.impedance_sign, cfg.lambda0);
      robin1 = std::make_shared<const RobinSolver>(ctx.pots->q1, lambda, par, cfg.solver);
      auto r2 = std::make_shared<const RobinSolver>(ctx.pots->q2, lambda, par, cfg.solver);
      dmap = map_difference(assemble_rtd(*robin1, basis), assemble_rtd(*r2, basis));
      diff_op = std::make_shared<DifferenceOperator>(std::make_shared<RtdOperator>(robin1), std::make_shared<RtdOperator>(r2));
    }
    if (cfg.fit_varkappa) {
      std::vector<double> im, un;
      for (double tau : cfg.taus) {
        const FrequencyPair p = make_frequency_pair({0, 0, 0}, tau, lambda);
        const auto [s1, s2] = solve_cgo_pair(ctx.pots->q1, ctx.pots->q2, p, cfg.cgo);
        im.push_back(s1.im_xi);
        un.push_back(s1.u_norm_X);
      }
      varkappa = fit_varkappa(im, un);
      diag["varkappa_fit"] = varkappa;
    }
  } catch (const Error& ex) {
    for (auto& r : recs) {
      fail(r, ex.kind(), ex.what());
      r.t_total = since(t_start);
    }
    diag["setup_error"] = ex.what();
    return recs;
  }
  const double delta_map = operator_norm(dmap);
  const double t_setup = since(t_start);
  diag["delta_map"] = delta_map;
  diag["e_lambda"] = std::isfinite(e) ? nlohmann::json(e) : nlohmann::json(nullptr);

  QhatSetup qs;
  qs.mode = cfg.qhat_mode;
  qs.q1 = &ctx.pots->q1;
  qs.q2 = &ctx.pots->q2;
  qs.cgo = cfg.cgo;
  qs.diff = diff_op;
  qs.noise = noise;
  qs.robin = robin1;
  qs.runge1 = runge1;
  qs.runge2 = runge2;
  qs.runge_threshold = cfg.runge_threshold;
  qs.max_defect = cfg.runge_max_defect;

  try {
    if (cfg.noise_model == NoiseModel::random) {
      noise = std::make_shared<UnitNoiseOperator>(g, kind, cfg.seed, cfg.noise_rank);
    } else {
      // aimed at eta = 0 for a reference tau fixed before delta is known
      const double tref = cfg.tau_override ? *cfg.tau_override : cfg.taus.front();
      const auto [x, y] = cgo_boundary_data({0, 0, 0}, tref, lambda, qs);
      noise = std::make_shared<AlignedNoiseOperator>(g, kind, x, y);
    }
    qs.noise = noise;
  } catch (const Error& ex) {
    for (auto& r : recs) fail(r, ex.kind(), ex.what());
    diag["setup_error"] = ex.what();
    return recs;
  }

  const TorusGrid tor = g->hminus1_torus();
  std::map<double, std::map<std::size_t, QhatEstimate>> cache;
  const ModulusSpec ms{cfg.schedule.c, cfg.schedule.n};

  for (auto& r : recs) {
    const auto t0 = Clock::now();
    r.t_setup = t_setup;
    r.e_lambda = e;
    r.distance = dist;
    r.admissible = admissible;
    r.delta_map = delta_map;
    r.varkappa = varkappa;
    try {
      r.delta_injected = cfg.perturbation == PerturbationMode::relative ? r.level * delta_map : r.level;
      r.delta = r.delta_injected == 0.0 ? delta_map : operator_norm(perturbed_map(dmap, *noise, r.delta_injected));
      r.triple_log_x = triple_log_x(r.delta_injected, cfg.schedule.theta, cfg.schedule.n);
      r.prefactor = modulus_prefactor(lambda, imp ? 1.0 : e, cfg.variant, cfg.lambda0);

      if (r.delta == 0.0) {
        // q1 = q2 and nothing injected: nothing to reconstruct
        r.degenerate = true;
        r.C = 0.0;
        r.phi = 0.0;
        r.modulus = 0.0;
        if (cfg.tau_override) {
          const ScheduleParams sp = schedule(*cfg.tau_override, cfg.schedule);
          r.tau = sp.tau;
          r.s = cfg.s_override.value_or(sp.s);
          r.epsilon = sp.epsilon;
          r.log_epsilon = sp.log_epsilon;
        } else {
          r.tau = r.s = std::numeric_limits<double>::infinity();
          r.epsilon = 0.0;
          r.log_epsilon = -std::numeric_limits<double>::infinity();
        }
        r.tau_overridden = cfg.tau_override.has_value();
        r.s_overridden = cfg.s_override.has_value();
        r.herr = r.herr_noiseless = r.herr_rel = 0.0;
        r.t_total = since(t0);
        continue;
      }

      const double log_C = cfg.schedule.theta * std::log(r.delta);
      r.C = std::exp(log_C);
      r.phi = phi_c(1.0 / r.C, ms);
      r.modulus = r.prefactor * r.phi;

      ScheduleParams sp = cfg.schedule;
      sp.varkappa = varkappa;
      const double tau = cfg.tau_override ? *cfg.tau_override : select_tau_log(log_C, varkappa, cfg.schedule.n);
      sp = schedule(tau, sp);
      r.tau = sp.tau;
      r.epsilon = sp.epsilon;
      r.log_epsilon = sp.log_epsilon;
      r.s = cfg.s_override.value_or(sp.s);
      r.tau_overridden = cfg.tau_override.has_value();
      r.s_overridden = cfg.s_override.has_value();

      const auto pts = lowpass_lattice(tor, r.s, true);
      r.modes = 0;
      auto& tc = cache[r.tau];
      std::vector<QhatEstimate> used;
      used.reserve(pts.size());
      for (const auto& p : pts) {
        auto it = tc.find(p.bin);
        if (it == tc.end()) it = tc.emplace(p.bin, qhat_estimate(p.eta, r.tau, lambda, qs)).first;
        used.push_back(it->second);
      }
      std::vector<Complex> s0, sp_, sm;
      CgoDiagnostics& cd = r.cgo;
      cd.min_im_xi = std::numeric_limits<double>::infinity();
      for (const auto& q : used) {
        s0.push_back(q.value);
        sp_.push_back(q.value + r.delta_injected * q.noise_unit);
        sm.push_back(q.value - r.delta_injected * q.noise_unit);
        cd.solves += 2;
        cd.max_iterations = std::max(cd.max_iterations, q.iterations);
        cd.max_residual = std::max(cd.max_residual, q.cgo_residual);
        cd.max_w_times_im_xi = std::max(cd.max_w_times_im_xi, q.w_times_im_xi);
        cd.max_remainder = std::max(cd.max_remainder, std::abs(q.remainder));
        cd.max_remainder_bound = std::max(cd.max_remainder_bound, q.remainder_bound);
        cd.min_im_xi = std::min(cd.min_im_xi, q.im_xi);
      }
      r.herr_noiseless = hminus1_error(tor, ctx.exact, pts, s0, r.s);
      r.herr = r.delta_injected == 0.0
                   ? r.herr_noiseless
                   : std::max(hminus1_error(tor, ctx.exact, pts, sp_, r.s), hminus1_error(tor, ctx.exact, pts, sm, r.s));
      r.herr_rel = ctx.dq_norm > 0.0 ? r.herr / ctx.dq_norm : 0.0;
      r.tail = std::sqrt(hminus1_tail_sq(tor, ctx.exact, r.s));
      const LowpassResult lp = lowpass_invert(g, pts, sp_, r.s, ctx.pots->kappa);
      r.modes = lp.modes;
      r.tail_bound = lp.tail_bound;

      const std::string stem = cfg.out + "/lambda" + std::to_string(li) + "_level" + std::to_string(r.level_index);
      if (cfg.dump_fields) write_field(stem + "_reconstruction", lp.interior, "reconstruction");
      if (cfg.dump_qhat) write_qhat_csv(stem + "_qhat.csv", used, r.delta_injected);
    } catch (const Error& ex) {
      fail(r, ex.kind(), ex.what());
    }
    r.t_qhat = since(t0);
    r.t_total = r.t_setup + r.t_qhat;
  }
  return recs;
}

}  // namespace

PotentialPair make_potentials(const ExperimentConfig& cfg, GeometryPtr g) {
  RealField base(g, Support::interior);
  base.values.setConstant(cfg.q0);
  RealField bump = bump_field(g, cfg.bump);
  RealField one = base;
  one.values += bump.values;
  PotentialPair p{Potential(one, -1.0, "q1"), Potential(base, -1.0, "q2"), 0.0};
  if (!admissible_pair(p.q1, p.q2)) throw SupportError("q1 - q2 does not vanish on Omega1; shrink the bump");
  const double sup = bump.values.size() ? bump.values.cwiseAbs().maxCoeff() : 0.0;
  p.kappa = cfg.kappa >= 0.0 ? cfg.kappa : sup;
  if (cfg.kappa >= 0.0 && sup > cfg.kappa) throw ConfigError("bump exceeds the sup-norm budget kappa");
  return p;
}

bool ExperimentResult::all_ok() const {
  for (const auto& r : records)
    if (!r.ok) return false;
  return true;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GeometryPtr g = build_geometry(cfg.geometry);
  const PotentialPair pots = make_potentials(cfg, g);
  if (cfg.dump_fields || cfg.dump_qhat) std::filesystem::create_directories(cfg.out);

  LambdaContext ctx{&cfg, g, &pots, difference(pots.q1, pots.q2), CVec(), 0.0};
  ctx.exact = fourier_coefficients(ctx.dq);
  ctx.dq_norm = sobolev_interior_norm(ctx.dq, -1);
  if (cfg.dump_fields) write_field(cfg.out + "/dq", ctx.dq, "q1 - q2");

  const int nl = static_cast<int>(cfg.lambdas.size());
  std::vector<std::vector<StabilityRecord>> per(static_cast<std::size_t>(nl));
  std::vector<nlohmann::json> diag(static_cast<std::size_t>(nl));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int li = next++; li < nl; li = next++) {
      auto& d = diag[static_cast<std::size_t>(li)];
      d["lambda"] = cfg.lambdas[static_cast<std::size_t>(li)];
      per[static_cast<std::size_t>(li)] = run_lambda(ctx, li, d);
    }
  };
  const int nt = std::max(1, std::min(cfg.threads, nl));
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResult res;
  for (auto& v : per) res.records.insert(res.records.end(), v.begin(), v.end());
  nlohmann::json run;
  run["config"] = nlohmann::json::parse(config_to_json(cfg));
  run["geometry"] = g->describe();
  run["dq_hminus1"] = ctx.dq_norm;
  run["kappa"] = pots.kappa;
  run["lambdas"] = diag;
  res.run_json = run.dump();
  return res;
}

ExperimentResult run_stability_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.variant = Variant::dirichlet;
  return run_experiment(c);
}

ExperimentResult run_impedance_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.variant = Variant::impedance;
  return run_experiment(c);
}

void write_experiment(const std::string& dir, const ExperimentResult& r) {
  std::filesystem::create_directories(dir);
  write_records_csv(dir + "/records.csv", r.records);
  write_records_json(dir + "/records.json", r.records, r.run_json);
}

}  // namespace helmstab
