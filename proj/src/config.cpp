#include "helmstab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace helmstab {

using nlohmann::json;

PerturbationMode parse_perturbation_mode(const std::string& s) {
  if (s == "relative") return PerturbationMode::relative;
  if (s == "absolute") return PerturbationMode::absolute;
  throw ConfigError("unknown perturbation mode '" + s + "'");
}

std::string perturbation_mode_name(PerturbationMode m) {
  return m == PerturbationMode::relative ? "relative" : "absolute";
}

NoiseModel parse_noise_model(const std::string& s) {
  if (s == "random") return NoiseModel::random;
  if (s == "aligned") return NoiseModel::aligned;
  throw ConfigError("unknown noise model '" + s + "'");
}

std::string noise_model_name(NoiseModel m) { return m == NoiseModel::random ? "random" : "aligned"; }

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void get(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void get_vec3(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_number()) {
    out = {v.get<double>(), v.get<double>(), v.get<double>()};
    return;
  }
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string("'") + key + "' needs three numbers");
  for (int d = 0; d < 3; ++d) out[d] = v[d].get<double>();
}

Patch parse_patch(const json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "all") return Patch::all_faces();
    return Patch::face(parse_face(s));
  }
  if (!j.is_array()) throw ConfigError(where + " must be \"all\", a face name or a list of rectangles");
  Patch p;
  for (const json& r : j) {
    if (r.is_string()) {
      p.rects.push_back(PatchRect{parse_face(r.get<std::string>())});
      continue;
    }
    only_keys(r, where, {"face", "u", "v"});
    PatchRect rect;
    rect.face = parse_face(r.at("face").get<std::string>());
    if (r.contains("u")) {
      rect.u0 = r.at("u").at(0).get<double>();
      rect.u1 = r.at("u").at(1).get<double>();
    }
    if (r.contains("v")) {
      rect.v0 = r.at("v").at(0).get<double>();
      rect.v1 = r.at("v").at(1).get<double>();
    }
    p.rects.push_back(rect);
  }
  if (p.rects.empty()) throw ConfigError(where + " is empty");
  return p;
}

json patch_json(const Patch& p) {
  json a = json::array();
  for (const auto& r : p.rects) {
    json o{{"face", face_name(r.face)}};
    if (r.u1 < 1e299) o["u"] = {r.u0, r.u1};
    if (r.v1 < 1e299) o["v"] = {r.v0, r.v1};
    a.push_back(o);
  }
  return a;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (lambdas.empty()) throw ConfigError("no lambda values");
  for (double l : lambdas) {
    if (variant == Variant::dirichlet && l < 1.0) throw ConfigError("Dirichlet experiments need lambda >= 1");
    if (variant == Variant::impedance && l < lambda0) throw ConfigError("impedance experiments need lambda >= lambda0");
  }
  if (levels.empty()) throw ConfigError("no perturbation levels");
  for (double v : levels)
    if (!(v >= 0.0)) throw ConfigError("perturbation levels must be nonnegative");
  for (double t : taus)
    if (!(t >= 1.0)) throw ConfigError("tau values must be >= 1");
  if (!(schedule.theta > 0.0 && schedule.theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(schedule.c > 0.0)) throw ConfigError("c must be positive");
  if (!(schedule.varkappa > 0.0)) throw ConfigError("varkappa must be positive");
  if (tau_override && !(*tau_override >= 1.0)) throw ConfigError("tau override must be >= 1");
  if (s_override && !(*s_override > 0.0)) throw ConfigError("s override must be positive");
  if (basis_size < 1) throw ConfigError("basis size must be positive");
  if (spectral_window < 1) throw ConfigError("spectral window must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (variant == Variant::impedance && !(impedance_a > 0.0)) throw ConfigError("impedance coefficient must be positive");
  if (impedance_sign != 1 && impedance_sign != -1) throw ConfigError("impedance sign must be +1 or -1");
  if (noise_model == NoiseModel::aligned && qhat_mode != QhatMode::data)
    throw ConfigError("aligned noise is built from the data-mode CGO traces");
  if (variant == Variant::impedance && qhat_mode == QhatMode::runge)
    throw ConfigError("the runge route is only available for Dirichlet maps");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"name", "variant", "seed", "threads", "geometry", "potential", "lambdas", "taus",
                          "perturbation", "schedule", "basis", "solver", "cgo", "qhat", "impedance", "output"});
  ExperimentConfig c;
  try {
    get(j, "name", c.name);
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    get(j, "seed", c.seed);
    get(j, "threads", c.threads);
    get(j, "lambdas", c.lambdas);
    get(j, "taus", c.taus);
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      only_keys(g, "geometry", {"subdivisions", "side", "omega0_lo", "omega0_hi", "gamma", "sigma", "torus_factor",
                                "cgo_torus_factor"});
      get(g, "subdivisions", c.geometry.subdivisions);
      get(g, "side", c.geometry.side);
      get_vec3(g, "omega0_lo", c.geometry.omega0_lo);
      get_vec3(g, "omega0_hi", c.geometry.omega0_hi);
      if (g.contains("gamma")) c.geometry.gamma = parse_patch(g.at("gamma"), "geometry.gamma");
      if (g.contains("sigma")) c.geometry.sigma = parse_patch(g.at("sigma"), "geometry.sigma");
      get(g, "torus_factor", c.geometry.torus_factor);
      get(g, "cgo_torus_factor", c.geometry.cgo_torus_factor);
    }
    if (j.contains("potential")) {
      const json& p = j.at("potential");
      only_keys(p, "potential", {"q0", "kappa", "bump"});
      get(p, "q0", c.q0);
      get(p, "kappa", c.kappa);
      if (p.contains("bump")) {
        const json& b = p.at("bump");
        only_keys(b, "potential.bump", {"amplitude", "center", "half_width", "shape"});
        get(b, "amplitude", c.bump.amplitude);
        get_vec3(b, "center", c.bump.center);
        get_vec3(b, "half_width", c.bump.half_width);
        if (b.contains("shape")) c.bump.shape = parse_bump_shape(b.at("shape").get<std::string>());
      }
    }
    if (j.contains("perturbation")) {
      const json& p = j.at("perturbation");
      only_keys(p, "perturbation", {"levels", "mode", "model", "rank"});
      if (p.contains("model")) c.noise_model = parse_noise_model(p.at("model").get<std::string>());
      get(p, "levels", c.levels);
      if (p.contains("mode")) c.perturbation = parse_perturbation_mode(p.at("mode").get<std::string>());
      get(p, "rank", c.noise_rank);
    }
    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      only_keys(s, "schedule", {"varkappa", "c", "theta", "delta_interp", "tau", "s", "fit_varkappa"});
      get(s, "varkappa", c.schedule.varkappa);
      get(s, "c", c.schedule.c);
      get(s, "theta", c.schedule.theta);
      get(s, "delta_interp", c.schedule.delta_interp);
      get(s, "fit_varkappa", c.fit_varkappa);
      if (s.contains("tau") && !s.at("tau").is_null()) c.tau_override = s.at("tau").get<double>();
      if (s.contains("s") && !s.at("s").is_null()) c.s_override = s.at("s").get<double>();
    }
    if (j.contains("basis")) {
      only_keys(j.at("basis"), "basis", {"size"});
      get(j.at("basis"), "size", c.basis_size);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      only_keys(s, "solver", {"flux", "spectral_margin", "window", "kappa0", "check_spectrum"});
      if (s.contains("flux")) c.solver.flux = parse_flux(s.at("flux").get<std::string>());
      get(s, "spectral_margin", c.solver.spectral_margin);
      get(s, "check_spectrum", c.solver.check_spectrum);
      get(s, "window", c.spectral_window);
      get(s, "kappa0", c.kappa0);
    }
    if (j.contains("cgo")) {
      const json& s = j.at("cgo");
      only_keys(s, "cgo", {"symbol", "tol", "max_iter", "growth_limit", "guard"});
      if (s.contains("symbol")) c.cgo.symbol = parse_symbol(s.at("symbol").get<std::string>());
      get(s, "tol", c.cgo.tol);
      get(s, "max_iter", c.cgo.max_iter);
      get(s, "growth_limit", c.cgo.growth_limit);
      get(s, "guard", c.cgo.guard);
    }
    if (j.contains("qhat")) {
      const json& s = j.at("qhat");
      only_keys(s, "qhat", {"mode", "runge_threshold", "max_defect"});
      if (s.contains("mode")) c.qhat_mode = parse_qhat_mode(s.at("mode").get<std::string>());
      get(s, "runge_threshold", c.runge_threshold);
      get(s, "max_defect", c.runge_max_defect);
    }
    if (j.contains("impedance")) {
      const json& s = j.at("impedance");
      only_keys(s, "impedance", {"a", "sign", "lambda0"});
      get(s, "a", c.impedance_a);
      get(s, "sign", c.impedance_sign);
      get(s, "lambda0", c.lambda0);
    }
    if (j.contains("output")) {
      const json& s = j.at("output");
      only_keys(s, "output", {"dir", "dump_fields", "dump_qhat"});
      get(s, "dir", c.out);
      get(s, "dump_fields", c.dump_fields);
      get(s, "dump_qhat", c.dump_qhat);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  json j;
  j["name"] = c.name;
  j["variant"] = variant_name(c.variant);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["geometry"] = {{"subdivisions", g.subdivisions},
                   {"side", g.side},
                   {"omega0_lo", g.omega0_lo},
                   {"omega0_hi", g.omega0_hi},
                   {"gamma", patch_json(g.gamma)},
                   {"sigma", patch_json(g.sigma)},
                   {"torus_factor", g.torus_factor},
                   {"cgo_torus_factor", g.cgo_torus_factor}};
  j["potential"] = {{"q0", c.q0},
                    {"kappa", c.kappa},
                    {"bump",
                     {{"amplitude", c.bump.amplitude},
                      {"center", c.bump.center},
                      {"half_width", c.bump.half_width},
                      {"shape", bump_shape_name(c.bump.shape)}}}};
  j["lambdas"] = c.lambdas;
  j["taus"] = c.taus;
  j["perturbation"] = {{"levels", c.levels}, {"mode", perturbation_mode_name(c.perturbation)},
                       {"model", noise_model_name(c.noise_model)},
                       {"rank", c.noise_rank}};
  j["schedule"] = {{"varkappa", c.schedule.varkappa},
                   {"c", c.schedule.c},
                   {"theta", c.schedule.theta},
                   {"delta_interp", c.schedule.delta_interp},
                   {"fit_varkappa", c.fit_varkappa},
                   {"tau", c.tau_override ? json(*c.tau_override) : json(nullptr)},
                   {"s", c.s_override ? json(*c.s_override) : json(nullptr)}};
  j["basis"] = {{"size", c.basis_size}};
  j["solver"] = {{"flux", flux_name(c.solver.flux)},
                 {"spectral_margin", c.solver.spectral_margin},
                 {"check_spectrum", c.solver.check_spectrum},
                 {"window", c.spectral_window},
                 {"kappa0", c.kappa0}};
  j["cgo"] = {{"symbol", symbol_name(c.cgo.symbol)},
              {"tol", c.cgo.tol},
              {"max_iter", c.cgo.max_iter},
              {"growth_limit", c.cgo.growth_limit},
              {"guard", c.cgo.guard}};
  j["qhat"] = {{"mode", qhat_mode_name(c.qhat_mode)},
               {"runge_threshold", c.runge_threshold},
               {"max_defect", c.runge_max_defect}};
  j["impedance"] = {{"a", c.impedance_a}, {"sign", c.impedance_sign}, {"lambda0", c.lambda0}};
  j["output"] = {{"dir", c.out}, {"dump_fields", c.dump_fields}, {"dump_qhat", c.dump_qhat}};
  return j.dump(2);
}

}  // namespace helmstab
