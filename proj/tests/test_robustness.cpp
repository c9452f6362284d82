// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "augmincer/errors.hpp"
#include "augmincer/robustness.hpp"
#include "augmincer/synthetic.hpp"

using namespace augmincer;
using namespace augmincer::robust;

namespace {

synth::EconomyParams economy(std::uint64_t seed, std::size_t n = 5000) {
  synth::EconomyParams p;
  p.n_workers = n;
  p.n_occupations = 80;
  p.n_sectors = 10;
  p.n_occgroups = 8;
  p.seed = seed;
  return p;
}

// Kolmogorov-Smirnov distance of a sample from Uniform(0,1).
double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    d = std::max({d, (static_cast<double>(i) + 1) / n - p[i], p[i] - static_cast<double>(i) / n});
  return d;
}

}  // namespace

TEST_SUITE("robustness") {
  TEST_CASE("ladder specification terms") {
    const auto specs = ladder_specs();
    REQUIRE(specs.size() == 6);
    CHECK(specs[0].labels() == std::vector<std::string>{"(Intercept)", "educ", "exper", "exper2"});
    CHECK(specs[1].labels().size() == 6);
    CHECK(specs[2].labels().back() == "sub:d");
    CHECK(specs[3].labels().back() == "urban");
    CHECK(specs[4].fixed_effects == std::optional<std::string>("sector"));
    CHECK(specs[5].filter.description() == "formal==1");
    CHECK(specs[5].labels() == specs[3].labels());
    CHECK(ladder_spec("M3").name == "M3");
    CHECK_THROWS_AS(ladder_spec("M7"), ValidationError);
  }

  TEST_CASE("R squared weakly increases along the nested ladder") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto pop = synth::generate_population(economy(seed));
      const auto fits = progressive_specs(pop.table);
      REQUIRE(fits.size() == 6);
      for (std::size_t i = 1; i < 4; ++i) CHECK(fits[i].r_squared >= fits[i - 1].r_squared - 1e-12);
      CHECK(fits[4].r_squared >= fits[3].r_squared - 1e-12);
      CHECK(fits[5].n_obs < fits[3].n_obs);
    }
  }

  TEST_CASE("zero augmentation effect leaves M2's index coefficient null") {
    int small = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto p = economy(seed, 3000);
      p.true_beta.beta1 = 0.0;
      p.true_beta.beta2 = 0.0;
      const auto pop = synth::generate_population(p);
      const auto m2 = econ::fit(pop.table, ladder_spec("M2"));
      if (std::abs(m2.z("ahc")) < 2.0) ++small;
    }
    CHECK(small >= 45);
  }

  TEST_CASE("identity permutation reproduces the original coefficient") {
    const auto pop = synth::generate_population(economy(4));
    PlaceboOptions o;
    o.n_perm = 99;
    o.permute = [](std::size_t, std::vector<double>&) {};
    const auto r = placebo_permutation(pop.table, ladder_spec("M4"), o);
    REQUIRE(r.permuted.size() == 99);
    for (double b : r.permuted) CHECK(b == r.beta_original);
    CHECK(r.p_value == 1.0);
  }

  TEST_CASE("placebo preconditions and reproducibility") {
    const auto pop = synth::generate_population(economy(5));
    PlaceboOptions o;
    o.n_perm = 50;
    CHECK_THROWS_AS(placebo_permutation(pop.table, ladder_spec("M4"), o), ValidationError);
    o.n_perm = 99;
    o.seed = 17;
    o.jobs = 1;
    const auto a = placebo_permutation(pop.table, ladder_spec("M4"), o);
    o.jobs = 4;
    const auto b = placebo_permutation(pop.table, ladder_spec("M4"), o);
    CHECK(a.permuted == b.permuted);
    CHECK(a.p_value == b.p_value);
    std::ostringstream ca, cb;
    write_placebo_csv(ca, a);
    write_placebo_csv(cb, b);
    CHECK(ca.str() == cb.str());

    AnalysisTable broken = pop.table;
    broken.numeric_mut("ahc")[0] += 1.0;  // no longer constant within its occupation
    CHECK_THROWS_AS(placebo_permutation(broken, ladder_spec("M4"), o), ValidationError);
  }

  TEST_CASE("placebo p-values are uniform under the null") {
    std::vector<double> ps;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto p = economy(seed, 2000);
      p.true_beta.beta2 = 0.0;
      const auto pop = synth::generate_population(p);
      PlaceboOptions o;
      o.n_perm = 99;
      o.seed = seed;
      ps.push_back(placebo_permutation(pop.table, ladder_spec("M6"), o).p_value);
    }
    // 5% critical value of the one-sample KS statistic at n = 50
    CHECK(ks_uniform(ps) < 1.36 / std::sqrt(50.0));
  }

  TEST_CASE("placebo has power against a strong interaction") {
    auto p = economy(6, 8000);
    p.true_beta.beta2 = 0.15;
    p.informal_d = synth::InformalD::kCell;
    const auto pop = synth::generate_population(p);
    PlaceboOptions o;
    o.n_perm = 199;
    o.seed = 3;
    o.jobs = 2;
    CHECK(placebo_permutation(pop.table, ladder_spec("M4"), o).p_value <= 0.01);
  }

  TEST_CASE("jackknife over two identical halves") {
    const auto pop = synth::generate_population(economy(7, 2000));
    std::vector<std::size_t> all(pop.table.rows());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> twice = all;
    twice.insert(twice.end(), all.begin(), all.end());
    AnalysisTable doubled = pop.table.select_rows(twice);
    std::vector<std::string> half(twice.size(), "A");
    std::fill(half.begin() + static_cast<std::ptrdiff_t>(all.size()), half.end(), "B");
    doubled.add_text("half", half);
    const auto r = jackknife_loso(doubled, ladder_spec("M4"), "half");
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) CHECK(row.beta == doctest::Approx(r.beta_full).epsilon(1e-10));
    CHECK(r.sign_changes == 0);
    CHECK(r.max_deviation < 1e-10);
  }

  TEST_CASE("jackknife needs two sectors") {
    const auto pop = synth::generate_population(economy(8, 2000));
    AnalysisTable t = pop.table;
    t.add_text("one", std::vector<std::string>(t.rows(), "X"));
    CHECK_THROWS_AS(jackknife_loso(t, ladder_spec("M4"), "one"), DomainError);
  }

  TEST_CASE("jackknife under a homogeneous effect") {
    auto p = economy(9, 20000);
    p.n_sectors = 20;
    p.informal_d = synth::InformalD::kCell;
    const auto pop = synth::generate_population(p);
    const auto r = jackknife_loso(pop.table, ladder_spec("M4"), "sector", kBeta2Term, 2);
    CHECK(r.rows.size() == 20);
    CHECK(r.sign_changes == 0);
    CHECK(r.min_beta <= r.beta_full);
    CHECK(r.max_beta >= r.beta_full);
    std::ostringstream md;
    write_jackknife_markdown(md, r);
    CHECK(md.str().find("sign changes 0") != std::string::npos);
  }

  TEST_CASE("heterogeneity partitions the estimation sample") {
    const auto pop = synth::generate_population(economy(10, 8000));
    const auto spec = ladder_spec("M4");
    const std::size_t full = econ::fit(pop.table, spec).n_obs;
    for (const auto& split : {Split::formality(), Split::gender(), Split::age_cohorts(), Split::education_levels(),
                              Split::sector()}) {
      const auto rows = heterogeneity(pop.table, spec, split);
      std::size_t total = 0;
      for (const auto& r : rows) {
        total += r.n_obs;
        if (r.fit) CHECK(r.fit->n_obs == r.n_obs);
      }
      CHECK(total == full);
    }
  }

  TEST_CASE("split on a constant field is the full sample") {
    const auto pop = synth::generate_population(economy(11, 3000));
    AnalysisTable t = pop.table;
    t.add_numeric("everyone", std::vector<double>(t.rows(), 1.0));
    const auto rows = heterogeneity(t, ladder_spec("M4"), Split::categorical("all", "everyone"));
    REQUIRE(rows.size() == 1);
    const auto full = econ::fit(t, ladder_spec("M4"));
    CHECK(rows[0].fit->coefficients == full.coefficients);
  }

  TEST_CASE("tiny subgroups are flagged") {
    const auto pop = synth::generate_population(economy(12, 3000));
    AnalysisTable t = pop.table;
    std::vector<double> g(t.rows(), 0.0);
    for (std::size_t i = 0; i < 5; ++i) g[i] = 1.0;
    t.add_numeric("rare", g);
    const auto rows = heterogeneity(t, ladder_spec("M4"), Split::categorical("rare", "rare"));
    REQUIRE(rows.size() == 2);
    const auto& small = rows[0].n_obs < rows[1].n_obs ? rows[0] : rows[1];
    CHECK(small.flag == "insufficient n");
    CHECK_FALSE(small.fit.has_value());
  }

  TEST_CASE("formal-only effect shows up in the formality split") {
    const auto pop = synth::generate_population(economy(13, 30000));
    const auto rows = heterogeneity(pop.table, ladder_spec("M4"), Split::formality());
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      REQUIRE(r.fit.has_value());
      if (r.group == "1") CHECK(r.fit->z(kBeta2Term) > 1.96);
      if (r.group == "0") CHECK(std::abs(r.fit->z(kBeta2Term)) < 2.58);
    }
    std::ostringstream md;
    write_heterogeneity_markdown(md, rows, kBeta2Term);
    CHECK(md.str().find("| Formal | 0.0") != std::string::npos);
    CHECK(md.str().find("| Informal | ") != std::string::npos);
  }

  TEST_CASE("triple interaction") {
    const auto pop = synth::generate_population(economy(14, 30000));
    const auto f = triple_interaction(pop.table);
    CHECK(f.find(kTripleTerm).has_value());
    CHECK(std::abs(f.coef(kTripleTerm) - 0.05) < 3.0 * f.se(kTripleTerm));

    AnalysisTable all_formal = pop.table;
    auto& formal = all_formal.numeric_mut("formal");
    std::fill(formal.begin(), formal.end(), 1.0);
    CHECK_THROWS_AS(triple_interaction(all_formal), NumericalError);
  }

  TEST_CASE("triple interaction is null without a formal-specific effect") {
    int small = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto p = economy(seed, 4000);
      p.true_beta.beta2 = 0.0;
      if (std::abs(triple_interaction(synth::generate_population(p).table).z(kTripleTerm)) < 2.0) ++small;
    }
    CHECK(small >= 18);
  }

  TEST_CASE("splits") {
    CHECK(parse_split("formality").field == "formal");
    CHECK(parse_split("age").bins.size() == 3);
    CHECK(parse_split("education").bins.size() == 4);
    CHECK_THROWS_AS(parse_split("zodiac"), ValidationError);
  }
}
