#pragma once

#include <optional>
#include <string>
#include <vector>

#include "helmstab/cgo.hpp"
#include "helmstab/forward.hpp"
#include "helmstab/reconstruct.hpp"
#include "helmstab/spectral.hpp"

namespace helmstab {

enum class PerturbationMode { relative, absolute };
PerturbationMode parse_perturbation_mode(const std::string& s);
std::string perturbation_mode_name(PerturbationMode m);
// random: seeded low-rank E; aligned: rank one, aimed at the eta = 0 CGO data
enum class NoiseModel { random, aligned };
NoiseModel parse_noise_model(const std::string& s);
std::string noise_model_name(NoiseModel m);

struct ExperimentConfig {
  std::string name = "experiment";
  Variant variant = Variant::dirichlet;
  std::uint64_t seed = 7;
  int threads = 1;

  GeometrySpec geometry;
  // q2 = q0, q1 = q0 + bump
  double q0 = 0.0;
  BumpSpec bump;
  double kappa = -1.0;  // sup-norm budget for |q1 - q2|; < 0 means measured

  std::vector<double> lambdas{10.0};
  std::vector<double> taus{8.0, 16.0, 32.0, 64.0};  // CGO scans and the varkappa fit
  std::vector<double> levels{0.0};
  PerturbationMode perturbation = PerturbationMode::relative;
  NoiseModel noise_model = NoiseModel::random;
  int noise_rank = 64;

  ScheduleParams schedule;  // n, varkappa, c, theta, delta_interp
  bool fit_varkappa = false;
  std::optional<double> tau_override;
  std::optional<double> s_override;

  int basis_size = 32;
  int spectral_window = 4;
  double kappa0 = 1e300;  // admissible-class radius
  SolverOptions solver;
  CgoOptions cgo;
  QhatMode qhat_mode = QhatMode::data;
  double runge_threshold = 1e-8;
  double runge_max_defect = 0.1;

  double impedance_a = 1.0;
  int impedance_sign = +1;
  double lambda0 = 1.0;

  std::string out = "out";
  bool dump_fields = false;
  bool dump_qhat = false;

  void validate() const;
};

// Unknown keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& c);

}  // namespace helmstab
