// SPDX-License-Identifier: Apache-2.0
//
// Acceptance battery. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "augmincer/cli.hpp"
#include "augmincer/econometrics.hpp"
#include "augmincer/index_builder.hpp"
#include "augmincer/parallel.hpp"
#include "augmincer/rng.hpp"
#include "augmincer/robustness.hpp"
#include "augmincer/scoring.hpp"
#include "augmincer/synthetic.hpp"
#include "augmincer/validation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace augmincer;
using econ::Matrix;
using econ::Vector;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

Matrix to_eigen(const oracle::Mat& m) {
  Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  return out;
}

Vector to_eigen(const oracle::Vec& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

// --- 1. estimator oracles ---------------------------------------------------

Verdict estimator_oracles() {
  constexpr double kTol = 1e-8, kAlphaTol = 1e-10;
  Rng rng = make_rng(101);
  double ols_err = 0, hc1_err = 0, wls_err = 0, iv_err = 0, ob_err = 0, ka_err = 0;
  const std::size_t kFixtures = 6;

  for (std::size_t rep = 0; rep < kFixtures; ++rep) {
    const std::size_t n = 30 + 30 * rep, k = 2 + rep % 3;
    oracle::Mat Xo;
    oracle::Vec yo, wo;
    for (std::size_t i = 0; i < n; ++i) {
      oracle::Vec row = {1.0};
      for (std::size_t j = 1; j < k; ++j) row.push_back(draw_normal(rng, 0.3 * static_cast<double>(j), 1.0 + j));
      double yi = 0.5;
      for (std::size_t j = 1; j < k; ++j) yi += (j % 2 ? 0.8 : -1.1) * row[j];
      yo.push_back(yi + draw_normal(rng, 0, 0.5 + std::abs(row[1])));
      wo.push_back(draw_uniform(rng, 0.2, 3.0));
      Xo.push_back(row);
    }
    const Matrix X = to_eigen(Xo);
    const Vector y = to_eigen(yo), w = to_eigen(wo);

    const auto want = oracle::ols(Xo, yo);
    const auto got = econ::ols(y, X, nullptr);
    const auto want_w = oracle::ols(Xo, yo, wo);
    const auto got_w = econ::ols(y, X, &w);
    for (std::size_t j = 0; j < k; ++j) {
      ols_err = std::max(ols_err, std::abs(got.coefficients[j] - want.beta[j]));
      hc1_err = std::max(hc1_err, std::abs(got.std_errors[j] - want.se_hc1[j]));
      wls_err = std::max({wls_err, std::abs(got_w.coefficients[j] - want_w.beta[j]),
                          std::abs(got_w.std_errors[j] - want_w.se_hc1[j])});
    }

    // 2SLS: one endogenous regressor, over-identified by two instruments.
    oracle::Mat Xf, Zf;
    oracle::Vec yi;
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = draw_normal(rng), z1 = draw_normal(rng), z2 = draw_normal(rng), u = draw_normal(rng);
      const double endog = 0.8 * z1 + 0.5 * z2 + 0.6 * u + draw_normal(rng, 0, 0.5);
      yi.push_back(1.0 + 0.5 * x1 + 2.0 * endog + u);
      Xf.push_back({1.0, x1, endog});
      Zf.push_back({1.0, x1, z1, z2});
    }
    const Matrix Xi = to_eigen(Xf), Zi = to_eigen(Zf);
    const auto iv = econ::tsls(to_eigen(yi), Xi.leftCols(2), Xi.rightCols(1), Zi.rightCols(2), nullptr);
    const auto iv_want = oracle::tsls(Xf, Zf, yi);
    for (std::size_t j = 0; j < 3; ++j) iv_err = std::max(iv_err, std::abs(iv.fit.coefficients[j] - iv_want[j]));

    // Oaxaca-Blinder with group A as reference, against oracle OLS fits.
    auto group = [&](std::size_t m, double shift, double b1) {
      std::vector<double> ys, x1s;
      oracle::Mat Xg;
      for (std::size_t i = 0; i < m; ++i) {
        x1s.push_back(draw_normal(rng, shift));
        ys.push_back(0.3 + b1 * x1s.back() + draw_normal(rng, 0, 0.7));
        Xg.push_back({1.0, x1s.back()});
      }
      AnalysisTable t;
      t.add_numeric("log_income", ys);
      t.add_numeric("x1", x1s);
      return std::make_pair(t, Xg);
    };
    const auto [ta, Xa] = group(n, 1.5, 0.9);
    const auto [tb, Xb] = group(n / 2 + 10, 0.4, 0.6);
    econ::ModelSpec spec;
    spec.terms = econ::parse_terms("x1");
    const auto ob = econ::oaxaca_blinder(ta, tb, spec, econ::OaxacaReference::kA);
    const auto fa = oracle::ols(Xa, ta.numeric("log_income"));
    const auto fb = oracle::ols(Xb, tb.numeric("log_income"));
    auto mean = [](const oracle::Mat& Xg, std::size_t j) {
      double s = 0;
      for (const auto& r : Xg) s += r[j];
      return s / static_cast<double>(Xg.size());
    };
    double explained = 0, unexplained = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      explained += (mean(Xa, j) - mean(Xb, j)) * fa.beta[j];
      unexplained += mean(Xb, j) * (fa.beta[j] - fb.beta[j]);
    }
    ob_err = std::max({ob_err, std::abs(ob.explained_total - explained), std::abs(ob.unexplained_total - unexplained)});

    // Krippendorff's alpha against pair enumeration.
    oracle::Vec ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
      ra.push_back(draw_uniform(rng, 0, 100));
      rb.push_back(0.7 * ra.back() + draw_normal(rng, 10, 15));
    }
    ka_err = std::max(ka_err, std::abs(validation::krippendorff_interval(ra, rb) - oracle::krippendorff_pairs(ra, rb)));
  }

  Verdict v;
  v.pass = ols_err <= kTol && hc1_err <= kTol && wls_err <= kTol && iv_err <= kTol && ob_err <= kTol &&
           ka_err <= kAlphaTol;
  v.detail = std::to_string(kFixtures) + " fixtures, n <= 180; max |diff| OLS " + sci(ols_err) + ", HC1 " +
             sci(hc1_err) + ", WLS " + sci(wls_err) + ", 2SLS " + sci(iv_err) + ", Oaxaca " + sci(ob_err) +
             ", alpha " + sci(ka_err);
  return v;
}

// --- 2. quantile optimality -------------------------------------------------

Verdict quantile_optimality() {
  constexpr double kRel = 1e-6;
  constexpr std::size_t kPerDim = 200;
  Rng rng = make_rng(202);
  const double taus[] = {0.1, 0.25, 0.5, 0.75, 0.9};
  double worst = -INFINITY;
  std::size_t failures = 0;
  for (std::size_t rep = 0; rep < 20; ++rep) {
    const std::size_t k = 1 + rep % 3;
    const std::size_t n = 20 + draw_index(rng, 31);
    const double tau = taus[rep % 5];
    oracle::Mat Xo;
    oracle::Vec yo;
    for (std::size_t i = 0; i < n; ++i) {
      oracle::Vec row = {1.0};
      for (std::size_t j = 1; j < k; ++j) row.push_back(draw_uniform(rng, 0, 10));
      double yi = 1.0;
      for (std::size_t j = 1; j < k; ++j) yi += 0.5 * row[j];
      yo.push_back(yi + draw_normal(rng, 0, 1.0 + 0.2 * (k > 1 ? row[1] : 0.0)));
      Xo.push_back(row);
    }
    const auto q = econ::quantile_fit(to_eigen(yo), to_eigen(Xo), tau);
    oracle::Vec center(k), half(k);
    for (std::size_t j = 0; j < k; ++j) {
      center[j] = q.beta(static_cast<Eigen::Index>(j));
      half[j] = j == 0 ? 1.0 : 0.2;
    }
    const double grid = oracle::lattice_min(center, half, kPerDim,
                                            [&](const oracle::Vec& b) { return oracle::check_loss(Xo, yo, b, tau); });
    const double rel = (q.objective - grid) / std::max(grid, 1e-300);
    worst = std::max(worst, rel);
    if (q.objective > grid * (1 + kRel)) ++failures;
  }
  return {failures == 0, "20 fixtures, k <= 3, 200 points per dimension; worst (objective - lattice min) / lattice min " +
                             sci(worst)};
}

// --- 3. structural identities -----------------------------------------------

Verdict structural_identities() {
  bool ok = true;
  std::string why;
  const double params[][2] = {{3.0, 0.5}, {1.5, 2.0}, {10.0, 0.1}};
  for (const auto& pl : params) {
    const double phi_bar = pl[0], lambda = pl[1];
    if (synth::phi(0.0, phi_bar, lambda) != 1.0) ok = false, why += " phi(0)!=1";
    constexpr std::size_t kGrid = 1000;
    const double top = 20.0 / std::max(lambda, 1.0);  // stays short of double saturation
    std::vector<double> v(kGrid);
    for (std::size_t i = 0; i < kGrid; ++i)
      v[i] = synth::phi(top * static_cast<double>(i) / kGrid, phi_bar, lambda);
    for (std::size_t i = 0; i < kGrid; ++i) {
      if (!(v[i] >= 1.0 && v[i] < phi_bar)) ok = false, why += " bound";
      if (i > 0 && !(v[i] > v[i - 1])) ok = false, why += " monotone";
      if (i > 1 && v[i] - 2 * v[i - 1] + v[i - 2] > 1e-12) ok = false, why += " concave";
    }
  }

  double ratio_err = 0, fd_err = 0;
  Rng rng = make_rng(303);
  for (int rep = 0; rep < 50; ++rep) {
    synth::ProductionParams p;
    p.phi_bar = draw_uniform(rng, 1.2, 5.0);
    p.lambda = draw_uniform(rng, 0.1, 2.0);
    p.sigma_f = draw_uniform(rng, 0.2, 0.9);
    synth::HardwareInputs hw{draw_uniform(rng, 0.5, 3), draw_uniform(rng, 0.5, 3), draw_uniform(rng, 0, 2), 1.0};
    synth::SoftwareInputs sw{draw_uniform(rng, 0.5, 3), draw_uniform(rng, 0.5, 3), draw_uniform(rng, 0.05, 4)};
    const auto mp = synth::marginal_product_check(p, hw, sw);
    const double want = synth::phi(sw.d_f, p.phi_bar, p.lambda) * sw.d_f;
    ratio_err = std::max({ratio_err, std::abs(mp.ratio - want) / want,
                          std::abs(mp.dy_dha / mp.dy_dhc - want) / want});
    fd_err = std::max({fd_err, std::abs(mp.fd_dha - mp.dy_dha) / std::abs(mp.dy_dha),
                       std::abs(mp.fd_dhc - mp.dy_dhc) / std::abs(mp.dy_dhc)});
  }
  if (ratio_err > 1e-10) ok = false, why += " ratio";
  if (fd_err > 1e-6) ok = false, why += " finite differences";
  return {ok, "phi grid 3 x 1000 points; marginal-product ratio max rel err " + sci(ratio_err) + ", finite-difference max rel err " +
                  sci(fd_err) + why};
}

// --- 4. recovery ------------------------------------------------------------

Verdict recovery(std::size_t jobs) {
  synth::EconomyParams p;  // n = 50,000; beta2 = 0.05 formal, informal D ~ 0
  synth::RecoveryOptions o;
  o.n_seeds = 50;
  o.first_seed = 1;
  o.jobs = jobs;
  const auto r = synth::recovery_harness(p, o);
  const bool ok = r.coverage_formal >= 0.90 && r.coverage_formal <= 0.99 && r.sign_recovery >= 0.95 &&
                  r.coverage_triple >= 0.90 && r.coverage_triple <= 0.99;
  return {ok, "50 seeds, n = 50000; beta2 coverage " + pct(r.coverage_formal) + ", sign pattern " +
                  pct(r.sign_recovery) + ", triple coverage " + pct(r.coverage_triple) + ", bias " +
                  sci(r.bias_formal)};
}

// --- 5. placebo calibration -------------------------------------------------

Verdict placebo_calibration(std::size_t jobs) {
  constexpr std::size_t kDatasets = 200;
  std::vector<double> p_values(kDatasets);
  parallel_for(kDatasets, jobs, [&](std::size_t i) {
    synth::EconomyParams p;
    p.n_workers = 3000;
    p.n_occupations = 80;
    p.n_sectors = 10;
    p.n_occgroups = 8;
    p.true_beta.beta2 = 0.0;
    p.seed = 5000 + i;
    const auto pop = synth::generate_population(p);
    robust::PlaceboOptions o;
    o.n_perm = 199;
    o.seed = 9000 + i;
    p_values[i] = robust::placebo_permutation(pop.table, robust::ladder_spec("M4"), o).p_value;
  });
  const auto rejections = static_cast<double>(std::count_if(p_values.begin(), p_values.end(),
                                                            [](double p) { return p <= 0.05; }));
  const double rate = rejections / kDatasets;
  return {rate >= 0.02 && rate <= 0.09,
          "200 null datasets (n = 3000, 80 occupations), 199 permutations; rejection rate at 5% " + pct(rate)};
}

// --- 6. jackknife stability -------------------------------------------------

Verdict jackknife_stability(std::size_t jobs) {
  constexpr std::size_t kSeeds = 50;
  std::vector<std::size_t> changes(kSeeds);
  parallel_for(kSeeds, jobs, [&](std::size_t i) {
    synth::EconomyParams p;
    p.n_workers = 20000;
    p.n_occupations = 80;
    p.n_sectors = 20;
    p.n_occgroups = 8;
    p.informal_d = synth::InformalD::kCell;  // every firm sees its sector's D
    p.seed = 700 + i;
    const auto pop = synth::generate_population(p);
    changes[i] = robust::jackknife_loso(pop.table, robust::ladder_spec("M4"), "sector").sign_changes;
  });
  const auto clean = static_cast<double>(std::count(changes.begin(), changes.end(), std::size_t{0}));
  const double share = clean / kSeeds;
  return {share >= 0.98, "50 seeds, 20 sectors, n = 20000; seeds with zero sign changes " + pct(share)};
}

// --- 7. index algebra -------------------------------------------------------

Verdict index_algebra() {
  Rng rng = make_rng(707);
  std::size_t violations = 0;
  double worst_scale = 0, worst_std = 0;
  for (std::size_t rep = 0; rep < 1000; ++rep) {
    const std::size_t n_occ = 3 + draw_index(rng, 8);
    std::vector<TaskScore> tasks;
    std::map<std::string, std::pair<double, double>> a_range, s_range;
    int next = 0;
    for (std::size_t o = 0; o < n_occ; ++o) {
      const std::string code = std::to_string(1000 + o);
      const std::size_t n_tasks = 1 + draw_index(rng, 10);
      for (std::size_t k = 0; k < n_tasks; ++k) {
        TaskScore t{"t" + std::to_string(next++), code, std::round(draw_uniform(rng, 0, 100) * 10) / 10,
                    std::round(draw_uniform(rng, 0, 100) * 10) / 10, AugType::kNone, draw_uniform(rng, 0.1, 5)};
        auto& ar = a_range.try_emplace(code, 100.0, 0.0).first->second;
        ar = {std::min(ar.first, t.augmentation), std::max(ar.second, t.augmentation)};
        auto& sr = s_range.try_emplace(code, 100.0, 0.0).first->second;
        sr = {std::min(sr.first, t.substitution), std::max(sr.second, t.substitution)};
        tasks.push_back(t);
      }
    }
    IndexConfig cfg;
    const auto base = compute_index(tasks, cfg);

    // Bounds and standardization.
    double mean = 0, sq = 0;
    for (const auto& idx : base.indices) {
      const auto& ar = a_range.at(idx.occupation_code);
      const auto& sr = s_range.at(idx.occupation_code);
      if (idx.ahc_raw < ar.first || idx.ahc_raw > ar.second) ++violations;
      if (idx.sub_raw < sr.first || idx.sub_raw > sr.second) ++violations;
      mean += idx.ahc_std;
      sq += idx.ahc_std * idx.ahc_std;
    }
    const double m = static_cast<double>(base.indices.size());
    mean /= m;
    worst_std = std::max({worst_std, std::abs(mean), std::abs(std::sqrt(sq / m - mean * mean) - 1.0)});

    // Importance-scale invariance.
    auto scaled = tasks;
    const double c = draw_uniform(rng, 0.01, 100);
    for (auto& t : scaled) t.importance *= c;
    const auto sc = compute_index(scaled, cfg);
    for (std::size_t i = 0; i < base.indices.size(); ++i)
      worst_scale = std::max({worst_scale, std::abs(sc.indices[i].ahc_raw - base.indices[i].ahc_raw),
                              std::abs(sc.indices[i].ahc_std - base.indices[i].ahc_std)});

    // Variant consistency.
    IndexConfig raw_cfg;
    raw_cfg.standardize = false;
    auto equal = tasks;
    for (auto& t : equal) t.importance = 2.5;
    raw_cfg.variant = IndexVariant::kImportanceWeighted;
    const auto eq_w = compute_index(equal, raw_cfg);
    raw_cfg.variant = IndexVariant::kRawUnweighted;
    const auto eq_u = compute_index(equal, raw_cfg);
    raw_cfg.variant = IndexVariant::kSubstitutionDisplacement;
    const auto sd = compute_index(tasks, raw_cfg);
    raw_cfg.variant = IndexVariant::kBinaryMedian;
    const auto bin = compute_index(tasks, raw_cfg);
    std::vector<double> weighted;
    for (const auto& idx : base.indices) weighted.push_back(idx.ahc_raw);
    std::sort(weighted.begin(), weighted.end());
    const std::size_t h = weighted.size() / 2;
    const double median = weighted.size() % 2 ? weighted[h] : 0.5 * (weighted[h - 1] + weighted[h]);
    for (std::size_t i = 0; i < base.indices.size(); ++i) {
      if (std::abs(eq_w.indices[i].ahc_raw - eq_u.indices[i].ahc_raw) > 1e-12) ++violations;
      if (std::abs(sd.indices[i].ahc_raw - base.indices[i].sub_raw) > 1e-12) ++violations;
      const double want = base.indices[i].ahc_raw >= median ? 1.0 : 0.0;
      if (bin.indices[i].ahc_raw != want) ++violations;
    }
  }
  const bool ok = violations == 0 && worst_scale <= 1e-10 && worst_std <= 1e-10;
  return {ok, "1000 fixtures; bound/variant violations " + std::to_string(violations) + ", scale drift " +
                  sci(worst_scale) + ", standardization drift " + sci(worst_std)};
}

// --- 8. determinism ---------------------------------------------------------

Verdict determinism() {
  testing_support::TempDir dir("acceptance");
  testing_support::write_file(dir / "run.ini",
                              "[paths]\ntasks = tasks.csv\nanalysis = run/indices/analysis.csv\n"
                              "indices = run/indices/indices.csv\n"
                              "[simulation]\nn_workers = 4000\nn_occupations = 60\nn_sectors = 8\nn_occgroups = 6\n"
                              "recovery_seeds = 10\n"
                              "[scoring]\nparallelism = 8\n[robustness]\nn_perm = 99\n[report]\nsvg = true\n");
  std::ostringstream tasks;
  tasks << "task_id,occupation_code,statement,importance\n";
  for (int i = 0; i < 400; ++i)
    tasks << "T" << i << ',' << 2000 + i / 8 << ",\"Prepare report, variant " << i << "\"," << 1 + i % 5 << '\n';
  testing_support::write_file(dir / "tasks.csv", tasks.str());

  const auto cfg = (dir / "run.ini").string();
  auto run_all = [&](const std::string& out_name, const std::string& jobs) {
    // The analysis paths point into run/, so every tree is generated there
    // first and then moved aside.
    const auto out = (dir / "run").string();
    std::ostringstream sink;
    int rc = 0;
    for (const char* cmd : {"simulate", "estimate", "robustness", "report", "score"})
      rc |= cli::run({"--config", cfg, "--seed", "17", "--jobs", jobs, "--out", out, "--quiet", cmd}, sink, sink);
    std::filesystem::rename(dir / "run", dir / out_name);
    return rc;
  };
  const int rc = run_all("a", "1") | run_all("b", "1") | run_all("c", "8");
  const auto a = testing_support::tree_hashes(dir / "a");
  const auto b = testing_support::tree_hashes(dir / "b");
  const auto c = testing_support::tree_hashes(dir / "c");

  // Mock scoring directly: parallelism levels 1, 4 and 16.
  std::vector<scoring::ScoreRequest> reqs;
  for (int i = 0; i < 500; ++i)
    reqs.push_back(scoring::make_request("M" + std::to_string(i), "Task statement " + std::to_string(i),
                                         scoring::kDefaultTemplate));
  std::vector<std::string> csvs;
  for (std::size_t par : {1u, 4u, 16u}) {
    scoring::MockBackend mock(42);
    scoring::BatchOptions o;
    o.parallelism = par;
    const auto r = scoring::score_batch(reqs, mock, nullptr, o);
    std::vector<TaskScore> scores;
    for (std::size_t i = 0; i < reqs.size(); ++i)
      if (r.scores[i])
        scores.push_back({reqs[i].task_id, "X", r.scores[i]->augmentation, r.scores[i]->substitution,
                          r.scores[i]->aug_type, 1.0});
    std::ostringstream out;
    scoring::write_score_csv(out, scores);
    csvs.push_back(out.str());
  }
  const bool mock_ok = csvs[0] == csvs[1] && csvs[1] == csvs[2] && csvs[0].size() > 1000;
  const bool ok = rc == 0 && a.size() > 20 && a == b && a == c && mock_ok;
  return {ok, std::to_string(a.size()) + " files per tree, runs identical " + (a == b ? "yes" : "no") +
                  ", jobs 1 vs 8 identical " + (a == c ? "yes" : "no") + ", mock scores identical at 1/4/16 " +
                  (mock_ok ? "yes" : "no") + (rc == 0 ? "" : ", a command failed")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance battery"};
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<int> only;
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Run only these criteria (1-8)")->delimiter(',')->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"estimator oracle equivalence", estimator_oracles},
      {"quantile regression optimality", quantile_optimality},
      {"structural-model identities", structural_identities},
      {"end-to-end parameter recovery", [&] { return recovery(jobs); }},
      {"placebo calibration", [&] { return placebo_calibration(jobs); }},
      {"jackknife stability", [&] { return jackknife_stability(jobs); }},
      {"index algebra", index_algebra},
      {"determinism", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
