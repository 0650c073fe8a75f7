#pragma once

#include <string>
#include <vector>

#include "helmstab/core.hpp"

namespace helmstab {

struct CgoDiagnostics {
  int solves = 0;
  int max_iterations = 0;
  double max_residual = 0.0;
  double max_w_times_im_xi = 0.0;
  double max_remainder = 0.0;
  double max_remainder_bound = 0.0;
  double min_im_xi = 0.0;
};

struct StabilityRecord {
  std::string variant;
  int lambda_index = 0;
  int level_index = 0;
  double lambda = 0.0;
  double level = 0.0;

  bool ok = true;
  bool degenerate = false;
  bool admissible = true;
  std::string error_kind;
  std::string error_message;

  double e_lambda = 0.0;  // NaN for impedance runs
  double distance = 0.0;  // lambda to the nearest computed eigenvalue
  double b_lambda = 0.0;
  double delta_map = 0.0;       // ||Delta Lambda|| of the exact maps
  double delta_injected = 0.0;  // spectral norm of the injected perturbation
  double delta = 0.0;           // ||Delta Lambda + E||, what the schedule sees
  double C = 0.0;               // delta^theta
  double varkappa = 0.0;
  double tau = 0.0;
  double s = 0.0;
  double epsilon = 0.0;
  double log_epsilon = 0.0;
  bool tau_overridden = false;
  bool s_overridden = false;
  int modes = 0;

  double herr = 0.0;            // worst case over the sign of the perturbation
  double herr_noiseless = 0.0;
  double herr_rel = 0.0;
  double dq_norm = 0.0;         // ||q1 - q2||_{H^-1}
  double tail = 0.0;            // H^-1 norm of the discarded modes
  double tail_bound = 0.0;
  double triple_log_x = 0.0;    // L(delta_injected^-theta)^{-2/(n+2)}, NaN off the branch
  double prefactor = 0.0;
  double phi = 0.0;
  double modulus = 0.0;

  CgoDiagnostics cgo;

  // JSON only
  double t_setup = 0.0;
  double t_qhat = 0.0;
  double t_total = 0.0;
};

// header and one line per record, %.17g, no timings
std::string records_csv(const std::vector<StabilityRecord>& r);
void write_records_csv(const std::string& path, const std::vector<StabilityRecord>& r);
// full diagnostics; extra is spliced in verbatim as the "run" member (JSON text)
void write_records_json(const std::string& path, const std::vector<StabilityRecord>& r, const std::string& extra = "{}");
std::vector<std::string> record_columns();
double record_field(const StabilityRecord& r, const std::string& name);

// CSV read back as named numeric columns (non-numeric cells become NaN)
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
Table read_csv_table(const std::string& path);

enum class FitMode { loglog, semilogy, semilogx, linear };
FitMode parse_fit_mode(const std::string& s);
std::string fit_mode_name(FitMode m);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  int points = 0;
};
// least squares on transformed coordinates; nonfinite or (for logs) nonpositive points are skipped
FitResult fit_scaling(const std::vector<double>& x, const std::vector<double>& y, FitMode mode = FitMode::loglog);
FitResult fit_scaling(const std::vector<StabilityRecord>& r, const std::string& x, const std::string& y,
                      FitMode mode = FitMode::loglog);

}  // namespace helmstab
