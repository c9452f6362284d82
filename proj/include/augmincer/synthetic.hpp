// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "augmincer/domain.hpp"
#include "augmincer/index_builder.hpp"
#include "augmincer/table.hpp"

namespace augmincer::synth {

/// Amplification function phi(D) = 1 + (phi_bar - 1)(1 - exp(-lambda D)).
/// D < 0 throws DomainError.
double phi(double d, double phi_bar, double lambda);

struct HardwareInputs {
  double k_hw = 1.0;    // physical capital
  double sum_hp = 1.0;  // physical-manual labor
  double k_rob = 0.0;   // robotic capital
  double kappa = 1.0;   // robot-labor substitution parameter
};

struct SoftwareInputs {
  double sum_hc = 1.0;  // routine-cognitive labor
  double sum_ha = 1.0;  // augmentable-cognitive labor
  double d_f = 0.0;     // firm digital labor stock
};

struct ProductionParams {
  double phi_bar = 3.0;
  double lambda = 0.5;
  double sigma_f = 0.5;     // hardware/software elasticity
  double capital_share = 0.4;  // K_HW exponent inside the hardware composite
  double hardware_weight = 0.5;  // CES distribution parameter on hardware
  double tfp = 1.0;

  void validate() const;
};

/// Hardware composite K_HW^a (sum_hP + kappa K_Rob)^(1-a).
double hardware_aggregate(const ProductionParams& p, const HardwareInputs& hw);
/// Software aggregate sum_hC + phi(D_f) sum_hA D_f.
double software_aggregate(const ProductionParams& p, const SoftwareInputs& sw);

/// Two-input CES A [w H^r + (1-w) S^r]^(1/r), r = (sigma-1)/sigma. Falls back
/// to Cobb-Douglas A H^w S^(1-w) when |r| < 1e-8. With r < 0 a zero input
/// gives zero output.
double ces(double hardware, double software, double sigma, double weight, double tfp = 1.0);

/// Y = CES(hardware, software; sigma_F). Negative inputs throw DomainError.
double firm_output(const ProductionParams& p, const HardwareInputs& hw, const SoftwareInputs& sw);

struct MarginalProducts {
  double dy_dha = 0.0;
  double dy_dhc = 0.0;
  double ratio = 0.0;     // dy_dha / dy_dhc, equal to phi(D_f) D_f
  double fd_dha = 0.0;    // central finite differences
  double fd_dhc = 0.0;
  bool premise_holds = true;  // false when D_f = 0
  std::string flag;
};

MarginalProducts marginal_product_check(const ProductionParams& p, const HardwareInputs& hw, const SoftwareInputs& sw,
                                        double fd_step = 1e-5);

// ---------------------------------------------------------------------------
// Synthetic population

/// Coefficients of the wage equation
/// ln w = alpha + b_educ educ + b_exper exper + b_exper2 exper^2 + b1 A + bC C
///        + bD T(D_f) + b2 A T(D_f) + b3 C T(D_f) + b_female female
///        + b_urban urban + b_formal formal + e.
struct TrueBeta {
  double alpha = 12.6;
  double educ = 0.08;
  double exper = 0.035;
  double exper2 = -0.0005;
  double beta1 = 0.09;
  double beta_c = -0.12;
  double beta_d = 0.39;
  double beta2 = 0.05;
  double beta3 = -0.03;
  double female = -0.33;
  double urban = 0.03;
  double formal = 0.4;
};

/// Firm adoption of informal workers.
enum class InformalD {
  kUniform,  // Uniform(0, 0.02)
  kZero,     // exactly 0
  kCell,     // same as formal workers (homogeneous effect)
};

std::string_view to_string(InformalD m);
std::optional<InformalD> parse_informal_d(std::string_view s);

struct EconomyParams {
  ProductionParams production;
  HardwareInputs hardware;  // fixture for the production-function checks only
  std::size_t n_workers = 50000;
  std::size_t n_occupations = 200;
  std::size_t n_sectors = 20;
  std::size_t n_occgroups = 10;
  double formal_share = 0.492;
  double female_share = 0.445;
  double urban_share = 0.885;
  double missing_education_share = 0.0;
  TrueBeta true_beta;
  double noise_sd = 0.6;
  bool heteroskedastic = false;  // variance 1 + 2 D_f times noise_sd^2
  InformalD informal_d = InformalD::kUniform;
  DTransform d_transform = DTransform::kStd;
  std::uint64_t seed = 1;

  /// Throws ValidationError listing the first violated constraint.
  void validate() const;
};

nlohmann::ordered_json to_json(const EconomyParams& p);

struct Population {
  std::vector<TaskScore> tasks;
  std::vector<OccupationIndex> indices;
  std::vector<AdoptionCell> cells;
  std::vector<WorkerRecord> workers;
  std::vector<double> firm_d;   // D_f per worker
  std::vector<double> firm_phi;  // phi(D_f) per worker
  AnalysisTable table;           // attach_indices output plus d_firm, phi and k_intensity
};

inline constexpr std::string_view kFirmDColumn = "d_firm";
inline constexpr std::string_view kPhiColumn = "phi";
/// Sector capital intensity, correlated with the adoption proxy but excluded
/// from the wage equation.
inline constexpr std::string_view kInstrumentColumn = "k_intensity";

/// Deterministic in params.seed. Occupation indices come from generated
/// task scores through compute_index, the adoption proxy from cell
/// indicators through compute_d_proxy, and the table from attach_indices, so
/// the synthetic path runs the real-data code.
Population generate_population(const EconomyParams& params);

/// Writes tasks.csv, indices.csv, cells.csv, workers.csv, analysis.csv and
/// params.json into `dir`.
void write_population(const std::string& dir, const Population& pop, const EconomyParams& params);

// ---------------------------------------------------------------------------
// Recovery harness

struct RecoveryOptions {
  std::size_t n_seeds = 50;
  std::uint64_t first_seed = 1;
  std::size_t jobs = 1;
  std::size_t placebo_permutations = 0;  // 0 skips the placebo step
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double beta2_m4 = 0.0, se_m4 = 0.0;
  double beta2_formal = 0.0, se_formal = 0.0;      // M6
  double beta2_informal = 0.0, se_informal = 0.0;  // M4 on formal == 0
  double triple = 0.0, se_triple = 0.0;
  std::optional<double> placebo_p;
  bool covered_formal = false;  // 95% CI of the formal estimate contains true beta2
  bool covered_triple = false;
  bool sign_pattern = false;    // formal z > 1.96 and informal z < 1.96
};

struct RecoveryReport {
  double truth_formal = 0.0;
  double truth_informal = 0.0;
  double truth_triple = 0.0;
  std::vector<SeedOutcome> seeds;
  double bias_formal = 0.0;      // mean(beta2_formal) - truth
  double mean_se_formal = 0.0;
  double coverage_formal = 0.0;
  double coverage_triple = 0.0;
  double sign_recovery = 0.0;
  std::optional<double> placebo_share_above_0_1;

  nlohmann::ordered_json to_json() const;
};

/// Generates and estimates once per seed (seeds first_seed, first_seed+1, ...)
/// in parallel; results are ordered by seed.
RecoveryReport recovery_harness(const EconomyParams& params, const RecoveryOptions& options);

void write_recovery_csv(std::ostream& out, const RecoveryReport& r);
void write_recovery_markdown(std::ostream& out, const RecoveryReport& r);

}  // namespace augmincer::synth
