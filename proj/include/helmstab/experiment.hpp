#pragma once

#include <string>
#include <vector>

#include "helmstab/config.hpp"
#include "helmstab/records.hpp"

namespace helmstab {

struct PotentialPair {
  Potential q1;  // q0 + bump
  Potential q2;  // q0
  double kappa = 0.0;  // sup-norm budget of q1 - q2
};
// throws SupportError when q1 - q2 does not vanish on Omega1
PotentialPair make_potentials(const ExperimentConfig& cfg, GeometryPtr g);

struct ExperimentResult {
  std::vector<StabilityRecord> records;
  std::string run_json = "{}";  // configuration echo and per-lambda diagnostics
  bool all_ok() const;
};

// Records for every (lambda, level): maps, delta, schedule, q-hat on |eta| <= s,
// low-pass inversion, H^-1 error and the modulus. Module failures end up in
// the record, not in an exception. Lambdas are spread over cfg.threads workers.
ExperimentResult run_stability_experiment(const ExperimentConfig& cfg);
ExperimentResult run_impedance_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// records.csv and records.json under dir
void write_experiment(const std::string& dir, const ExperimentResult& r);

}  // namespace helmstab
