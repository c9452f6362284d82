// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "augmincer/econometrics.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/rng.hpp"
#include "oracles.hpp"

using namespace augmincer;
using namespace augmincer::econ;

namespace {

Matrix to_eigen(const oracle::Mat& m) {
  Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  return out;
}

Vector to_eigen(const oracle::Vec& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

struct Fixture {
  oracle::Mat X;  // intercept first
  oracle::Vec y;
  oracle::Vec w;
};

Fixture random_fixture(Rng& rng, std::size_t n, std::size_t k, bool heteroskedastic = true) {
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    oracle::Vec row = {1.0};
    for (std::size_t j = 1; j < k; ++j) row.push_back(draw_normal(rng, 0.5 * static_cast<double>(j), 1.0 + j));
    double yi = 0.3;
    for (std::size_t j = 1; j < k; ++j) yi += (j % 2 ? 0.7 : -1.2) * row[j];
    const double sd = heteroskedastic ? 0.5 + std::abs(row.size() > 1 ? row[1] : 1.0) : 1.0;
    f.y.push_back(yi + draw_normal(rng, 0, sd));
    f.w.push_back(draw_uniform(rng, 0.2, 3.0));
    f.X.push_back(row);
  }
  return f;
}

AnalysisTable table_of(const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  AnalysisTable t;
  for (const auto& [name, v] : cols) t.add_numeric(name, v);
  return t;
}

double se_from_vcov(const FitResult& f, std::size_t j) { return std::sqrt(f.vcov[j * f.terms.size() + j]); }

}  // namespace

TEST_SUITE("econometrics") {
  TEST_CASE("terms and filters parse") {
    CHECK(parse_term("ahc:d:formal").factors == std::vector<std::string>{"ahc", "d", "formal"});
    CHECK(parse_term("ahc:d").label() == "ahc:d");
    CHECK(parse_terms("educ, exper,exper2").size() == 3);
    CHECK_THROWS_AS(parse_term("a:b:c:d"), ValidationError);
    CHECK_THROWS_AS(parse_term(""), ValidationError);
    const auto f = parse_filter("formal==1&age>=31");
    REQUIRE(f.all_of.size() == 2);
    CHECK(f.all_of[1].op == FilterOp::kGe);
    CHECK(f.all_of[1].value == 31.0);
    CHECK_THROWS_AS(parse_filter("age=>3"), ValidationError);
  }

  TEST_CASE("design matrix columns") {
    const auto t = table_of({{"log_income", {1, 2, 4}}, {"educ", {5, 6, 9}}, {"ahc", {2, 1, 0}}, {"d", {0.5, 3, 1}}});
    ModelSpec spec;
    spec.terms = {parse_term("educ")};
    const auto d = build_design(t, spec);
    CHECK(d.labels == std::vector<std::string>{std::string(kInterceptLabel), "educ"});
    CHECK(d.X.cols() == 2);
    CHECK(d.X(2, 0) == 1.0);
    CHECK(d.X(2, 1) == 9.0);

    ModelSpec prod;
    prod.terms = {parse_term("ahc:d")};
    CHECK(build_design(t, prod).X(0, 1) == 1.0);
  }

  TEST_CASE("design drops filtered and missing rows") {
    const double nan = std::nan("");
    const auto t = table_of({{"log_income", {1, 2, 4, 5, 7, 8}},
                             {"educ", {5, nan, 9, 1, 2, 3}},
                             {"formal", {1, 1, 1, 0, 1, 1}}});
    ModelSpec spec;
    spec.terms = {parse_term("educ")};
    spec.filter = parse_filter("formal==1");
    const auto d = build_design(t, spec);
    CHECK(d.rows == std::vector<std::size_t>{0, 2, 4, 5});
    CHECK(d.dropped_filter == 1);
    CHECK(d.dropped_missing == 1);

    ModelSpec missing;
    missing.terms = {parse_term("nope")};
    CHECK_THROWS_AS(build_design(t, missing), ValidationError);
  }

  TEST_CASE("fixed-effect absorption removes group-constant outcomes") {
    AnalysisTable t = table_of({{"log_income", {3, 3, 3, 7, 7, 7}}, {"x", {1, 2, 3, 1, 5, 2}}});
    t.add_text("sector", {"a", "a", "a", "b", "b", "b"});
    ModelSpec spec;
    spec.terms = {parse_term("x")};
    spec.fixed_effects = "sector";
    const auto d = build_design(t, spec);
    CHECK(d.n_groups == 2);
    CHECK(d.X.cols() == 1);
    CHECK(d.y.cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("collinear designs fail with the offending columns named") {
    const auto t = table_of({{"log_income", {1, 2, 3, 4, 6}}, {"a", {1, 2, 3, 4, 5}}, {"b", {2, 4, 6, 8, 10}}});
    ModelSpec spec;
    spec.terms = parse_terms("a,b");
    try {
      build_design(t, spec);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
    Matrix X(3, 2);
    X << 1, 2, 1, 2, 1, 2;
    CHECK_FALSE(collinear_set(X, {"c1", "c2"}).empty());
  }

  TEST_CASE("exact fit") {
    Matrix X(3, 2);
    X << 1, 0, 1, 1, 1, 2;
    Vector y(3);
    y << 1, 2, 3;
    for (auto cov : {CovarianceType::kClassical, CovarianceType::kHC0, CovarianceType::kHC1}) {
      OlsOptions o;
      o.covariance = cov;
      const auto f = ols(y, X, nullptr, o);
      CHECK(f.coefficients[0] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(f.coefficients[1] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(f.r_squared == doctest::Approx(1.0));
      CHECK(f.std_errors[0] < 1e-12);
      CHECK(f.std_errors[1] < 1e-12);
      CHECK(residuals(y, X, f.coefficients).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("intercept-only fit is the mean") {
    Matrix X = Matrix::Ones(5, 1);
    Vector y(5);
    y << 2, 4, 9, 1, 3;
    CHECK(ols(y, X, nullptr).coefficients[0] == doctest::Approx(3.8).epsilon(1e-15));
  }

  TEST_CASE("OLS, HC0, HC1 and classical SEs match the normal-equations oracle") {
    Rng rng = make_rng(41);
    for (int rep = 0; rep < 6; ++rep) {
      const auto fx = random_fixture(rng, 20 + 30 * rep, 3);
      const auto want = oracle::ols(fx.X, fx.y);
      const Matrix X = to_eigen(fx.X);
      const Vector y = to_eigen(fx.y);
      for (auto cov : {CovarianceType::kClassical, CovarianceType::kHC0, CovarianceType::kHC1}) {
        OlsOptions o;
        o.covariance = cov;
        const auto f = ols(y, X, nullptr, o);
        const auto& se = cov == CovarianceType::kClassical ? want.se_classical
                         : cov == CovarianceType::kHC0     ? want.se_hc0
                                                           : want.se_hc1;
        for (std::size_t j = 0; j < 3; ++j) {
          CHECK(std::abs(f.coefficients[j] - want.beta[j]) <= 1e-10);
          CHECK(std::abs(f.std_errors[j] - se[j]) <= 1e-10);
        }
        CHECK(std::abs(f.r_squared - want.r2) <= 1e-10);
      }
    }
  }

  TEST_CASE("WLS matches the weighted oracle; constant weights reproduce OLS") {
    Rng rng = make_rng(42);
    for (int rep = 0; rep < 5; ++rep) {
      const auto fx = random_fixture(rng, 40, 4);
      const auto want = oracle::ols(fx.X, fx.y, fx.w);
      const Matrix X = to_eigen(fx.X);
      const Vector y = to_eigen(fx.y);
      const Vector w = to_eigen(fx.w);
      const auto f = ols(y, X, &w);
      CHECK(f.weighted);
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(std::abs(f.coefficients[j] - want.beta[j]) <= 1e-10);
        CHECK(std::abs(f.std_errors[j] - want.se_hc1[j]) <= 1e-10);
      }
      const Vector c = Vector::Constant(40, 3.7);
      const auto fc = ols(y, X, &c);
      const auto fu = ols(y, X, nullptr);
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(fc.coefficients[j] == doctest::Approx(fu.coefficients[j]).epsilon(1e-13));
        CHECK(fc.std_errors[j] == doctest::Approx(fu.std_errors[j]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("residuals are orthogonal to the design") {
    Rng rng = make_rng(43);
    const auto fx = random_fixture(rng, 150, 5);
    const Matrix X = to_eigen(fx.X);
    const Vector y = to_eigen(fx.y);
    const auto f = ols(y, X, nullptr);
    CHECK((X.transpose() * residuals(y, X, f.coefficients)).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("HC1 is HC0 scaled by n/(n-k)") {
    Rng rng = make_rng(44);
    const auto fx = random_fixture(rng, 60, 4);
    const Matrix X = to_eigen(fx.X);
    const Vector y = to_eigen(fx.y);
    OlsOptions o0, o1;
    o0.covariance = CovarianceType::kHC0;
    o1.covariance = CovarianceType::kHC1;
    const auto f0 = ols(y, X, nullptr, o0);
    const auto f1 = ols(y, X, nullptr, o1);
    REQUIRE(f0.vcov.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) CHECK(f1.vcov[i] == doctest::Approx(f0.vcov[i] * 60.0 / 56.0).epsilon(1e-14));
    for (std::size_t j = 0; j < 4; ++j) CHECK(f1.std_errors[j] == doctest::Approx(se_from_vcov(f1, j)).epsilon(1e-14));
  }

  TEST_CASE("absorbed fixed effects equal dummy-variable OLS") {
    Rng rng = make_rng(45);
    for (std::size_t groups : {2u, 7u, 20u}) {
      const std::size_t n = 30 * groups;
      std::vector<double> y, x1, x2;
      std::vector<std::string> g;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t gi = i % groups;
        g.push_back("g" + std::to_string(gi));
        x1.push_back(draw_normal(rng, static_cast<double>(gi)));
        x2.push_back(draw_normal(rng));
        y.push_back(0.5 * x1.back() - 0.2 * x2.back() + 0.3 * static_cast<double>(gi * gi) + draw_normal(rng) * (1 + std::abs(x2.back())));
      }
      AnalysisTable t = table_of({{"log_income", y}, {"x1", x1}, {"x2", x2}});
      t.add_text("sector", g);
      for (std::size_t k = 1; k < groups; ++k) {
        std::vector<double> dk(n);
        for (std::size_t i = 0; i < n; ++i) dk[i] = (i % groups == k) ? 1.0 : 0.0;
        t.add_numeric("dum" + std::to_string(k), dk);
      }
      ModelSpec fe;
      fe.terms = parse_terms("x1,x2");
      fe.fixed_effects = "sector";
      ModelSpec dummies;
      dummies.terms = parse_terms("x1,x2");
      for (std::size_t k = 1; k < groups; ++k) dummies.terms.push_back(parse_term("dum" + std::to_string(k)));
      const auto a = fit(t, fe);
      const auto b = fit(t, dummies);
      for (const char* term : {"x1", "x2"}) {
        CHECK(std::abs(a.coef(term) - b.coef(term)) <= 1e-8);
        CHECK(std::abs(a.se(term) - b.se(term)) <= 1e-8);
      }
      CHECK(a.r_squared == doctest::Approx(b.r_squared).epsilon(1e-10));
      CHECK(a.fixed_effects == std::optional<std::string>("sector"));
      CHECK(a.df_model == b.df_model);
    }
  }

  TEST_CASE("2SLS with the regressor as its own instrument is OLS") {
    Rng rng = make_rng(46);
    const auto fx = random_fixture(rng, 80, 4);
    Matrix X = to_eigen(fx.X);
    const Vector y = to_eigen(fx.y);
    const Matrix exog = X.leftCols(2);
    const Matrix endog = X.rightCols(2);
    const auto iv = tsls(y, exog, endog, endog, nullptr);
    const auto o = ols(y, X, nullptr);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(iv.fit.coefficients[j] - o.coefficients[j]) <= 1e-10);
      CHECK(std::abs(iv.fit.std_errors[j] - o.std_errors[j]) <= 1e-10);
    }
  }

  TEST_CASE("2SLS matches the direct formulas") {
    Rng rng = make_rng(47);
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t n = 60 + 20 * rep;
      oracle::Mat Xfull, Zfull, Zover;
      oracle::Vec y;
      for (std::size_t i = 0; i < n; ++i) {
        const double x1 = draw_normal(rng);
        const double z1 = draw_normal(rng), z2 = draw_normal(rng);
        const double u = draw_normal(rng);
        const double endog = 0.8 * z1 + 0.5 * z2 + 0.6 * u + draw_normal(rng, 0, 0.5);
        y.push_back(1.0 + 0.5 * x1 + 2.0 * endog + u);
        Xfull.push_back({1.0, x1, endog});
        Zfull.push_back({1.0, x1, z1});
        Zover.push_back({1.0, x1, z1, z2});
      }
      const Matrix X = to_eigen(Xfull);
      const Matrix Zj = to_eigen(Zfull);
      const Matrix Zo = to_eigen(Zover);
      const Vector yy = to_eigen(y);
      const auto just = tsls(yy, X.leftCols(2), X.rightCols(1), Zj.rightCols(1), nullptr);
      const auto want_just = oracle::iv_just_identified(Xfull, Zfull, y);
      const auto over = tsls(yy, X.leftCols(2), X.rightCols(1), Zo.rightCols(2), nullptr);
      const auto want_over = oracle::tsls(Xfull, Zover, y);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(just.fit.coefficients[j] - want_just[j]) <= 1e-8);
        CHECK(std::abs(over.fit.coefficients[j] - want_over[j]) <= 1e-8);
      }
      REQUIRE(just.first_stage_f.size() == 1);
      CHECK(just.first_stage_f[0] > 10.0);
    }
  }

  TEST_CASE("irrelevant instruments give a null first-stage F and a warning") {
    Rng rng = make_rng(48);
    std::vector<double> fs;
    bool warned = false;
    for (int rep = 0; rep < 400; ++rep) {
      const Eigen::Index n = 300;
      Matrix exog = Matrix::Ones(n, 1);
      Matrix endog(n, 1), z(n, 1);
      Vector y(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        endog(i, 0) = draw_normal(rng);
        z(i, 0) = draw_normal(rng);
        y(i) = endog(i, 0) + draw_normal(rng);
      }
      try {
        const auto r = tsls(y, exog, endog, z, nullptr);
        fs.push_back(r.first_stage_f[0]);
        if (r.first_stage_f[0] < kWeakInstrumentF && !r.fit.warnings.empty()) warned = true;
      } catch (const NumericalError&) {
      }
    }
    std::sort(fs.begin(), fs.end());
    const double median = fs[fs.size() / 2];
    double mean = 0;
    for (double f : fs) mean += f / static_cast<double>(fs.size());
    // F(1, inf) is chi-square(1): mean 1, median 0.455
    CHECK(mean == doctest::Approx(1.0).epsilon(0.25));
    CHECK(median == doctest::Approx(0.455).epsilon(0.35));
    CHECK(warned);
  }

  TEST_CASE("table-level 2SLS orders exogenous terms first") {
    Rng rng = make_rng(49);
    const std::size_t n = 400;
    std::vector<double> y, x, d, z;
    for (std::size_t i = 0; i < n; ++i) {
      z.push_back(draw_normal(rng));
      x.push_back(draw_normal(rng));
      const double u = draw_normal(rng);
      d.push_back(z.back() + 0.5 * u);
      y.push_back(2 + 0.5 * d.back() + x.back() + u);
    }
    const auto t = table_of({{"log_income", y}, {"d", d}, {"x", x}, {"z", z}});
    ModelSpec spec;
    spec.terms = parse_terms("d,x");
    const auto r = fit_tsls(t, spec, {parse_term("d")}, {parse_term("z")});
    CHECK(r.fit.terms == std::vector<std::string>{std::string(kInterceptLabel), "x", "d"});
    CHECK(r.fit.coef("d") == doctest::Approx(0.5).epsilon(0.3));
    CHECK_THROWS_AS(fit_tsls(t, spec, {parse_term("z")}, {parse_term("d")}), ValidationError);
  }

  TEST_CASE("quantile examples") {
    Vector y(3);
    y << 1, 2, 9;
    const Matrix one = Matrix::Ones(3, 1);
    CHECK(quantile_fit(y, one, 0.5).beta(0) == doctest::Approx(2.0).epsilon(1e-12));

    Vector y10(10);
    y10 << 3, 7, 1, 9, 4, 10, 2, 8, 6, 5;
    const Matrix one10 = Matrix::Ones(10, 1);
    const auto q = quantile_fit(y10, one10, 0.9);
    double best = INFINITY;
    for (Eigen::Index i = 0; i < 10; ++i) {
      Vector b(1);
      b << y10(i);
      best = std::min(best, check_loss(y10, one10, b, 0.9));
    }
    CHECK(q.objective <= best + 1e-12);
    CHECK(q.beta(0) >= 9.0 - 1e-12);
    CHECK(q.beta(0) <= 10.0 + 1e-12);
  }

  TEST_CASE("quantile objective beats a 200x200 lattice") {
    Rng rng = make_rng(50);
    oracle::Mat Xo;
    oracle::Vec yo;
    for (int i = 0; i < 30; ++i) {
      const double x = draw_uniform(rng, 0, 10);
      Xo.push_back({1.0, x});
      yo.push_back(1 + 0.5 * x + draw_normal(rng, 0, 1 + 0.2 * x));
    }
    const Matrix X = to_eigen(Xo);
    const Vector y = to_eigen(yo);
    for (double tau : {0.25, 0.5, 0.75}) {
      const auto q = quantile_fit(y, X, tau);
      const oracle::Vec center = {q.beta(0), q.beta(1)};
      const double grid = oracle::lattice_min(center, {1.0, 0.2}, 200, [&](const oracle::Vec& b) {
        return oracle::check_loss(Xo, yo, b, tau);
      });
      CHECK(q.objective <= grid * (1 + 1e-6));
      CHECK(q.objective == doctest::Approx(oracle::check_loss(Xo, yo, center, tau)).epsilon(1e-12));
    }
  }

  TEST_CASE("median regression weakly beats least squares on check loss") {
    Rng rng = make_rng(51);
    for (int rep = 0; rep < 20; ++rep) {
      const auto fx = random_fixture(rng, 40, 3);
      const Matrix X = to_eigen(fx.X);
      const Vector y = to_eigen(fx.y);
      const auto o = ols(y, X, nullptr);
      const Vector b_ols = Eigen::Map<const Vector>(o.coefficients.data(), 3);
      CHECK(quantile_fit(y, X, 0.5).objective <= check_loss(y, X, b_ols, 0.5) + 1e-12);
    }
  }

  TEST_CASE("quantile fits report unavailable SEs") {
    Rng rng = make_rng(52);
    std::vector<double> y, x;
    for (int i = 0; i < 200; ++i) {
      x.push_back(draw_normal(rng));
      y.push_back(x.back() + draw_normal(rng));
    }
    ModelSpec spec;
    spec.terms = {parse_term("x")};
    const auto f = fit_quantile(table_of({{"log_income", y}, {"x", x}}), spec, 0.5);
    CHECK(std::isnan(f.std_errors[1]));
    CHECK_FALSE(f.warnings.empty());
    CHECK(f.coef("x") == doctest::Approx(1.0).epsilon(0.3));
  }

  TEST_CASE("oaxaca decomposition") {
    Rng rng = make_rng(53);
    auto group = [&](std::size_t n, double x_mean, double b0, double b1, double b2, double noise) {
      std::vector<double> y, x1, x2;
      for (std::size_t i = 0; i < n; ++i) {
        x1.push_back(draw_normal(rng, x_mean));
        x2.push_back(draw_normal(rng, 1.0));
        y.push_back(b0 + b1 * x1.back() + b2 * x2.back() + draw_normal(rng, 0, noise));
      }
      return table_of({{"log_income", y}, {"x1", x1}, {"x2", x2}});
    };
    ModelSpec spec;
    spec.terms = parse_terms("x1,x2");

    SUBCASE("identical groups") {
      const auto a = group(50, 1.0, 1, 2, 3, 1);
      const auto r = oaxaca_blinder(a, a, spec);
      CHECK(std::abs(r.gap) < 1e-14);
      for (double e : r.explained) CHECK(std::abs(e) < 1e-12);
      for (double u : r.unexplained) CHECK(std::abs(u) < 1e-12);
    }
    SUBCASE("only the mean of one covariate differs") {
      AnalysisTable a = group(80, 3.0, 1, 2, 0, 0);
      AnalysisTable b = group(80, 1.0, 1, 2, 0, 0);
      const auto r = oaxaca_blinder(a, b, spec);
      CHECK(r.explained_total == doctest::Approx(r.gap).epsilon(1e-10));
      CHECK(std::abs(r.unexplained_total) < 1e-10);
      CHECK(r.explained[1] == doctest::Approx(2.0 * (r.mean_a[1] - r.mean_b[1])).epsilon(1e-10));
    }
    SUBCASE("hand formula with reference A and adding-up for every reference") {
      const auto a = group(120, 1.5, 1, 0.8, -0.4, 0.7);
      const auto b = group(90, 0.5, 0.4, 0.6, -0.1, 0.9);
      auto rows = [](const AnalysisTable& t) {
        oracle::Mat X;
        for (std::size_t i = 0; i < t.rows(); ++i) X.push_back({1.0, t.numeric("x1")[i], t.numeric("x2")[i]});
        return X;
      };
      const auto Xa = rows(a), Xb = rows(b);
      const auto fa = oracle::ols(Xa, a.numeric("log_income"));
      const auto fb = oracle::ols(Xb, b.numeric("log_income"));
      auto mean_col = [](const oracle::Mat& X, std::size_t j) {
        double s = 0;
        for (const auto& r : X) s += r[j];
        return s / static_cast<double>(X.size());
      };
      double explained = 0, unexplained = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        explained += (mean_col(Xa, j) - mean_col(Xb, j)) * fa.beta[j];
        unexplained += mean_col(Xb, j) * (fa.beta[j] - fb.beta[j]);
      }
      const auto r = oaxaca_blinder(a, b, spec, OaxacaReference::kA);
      CHECK(std::abs(r.explained_total - explained) <= 1e-10);
      CHECK(std::abs(r.unexplained_total - unexplained) <= 1e-10);
      for (auto ref : {OaxacaReference::kA, OaxacaReference::kB, OaxacaReference::kPooled}) {
        const auto d = oaxaca_blinder(a, b, spec, ref);
        CHECK(std::abs(d.explained_total + d.unexplained_total - d.gap) <= 1e-10);
        double se = 0;
        for (std::size_t j = 0; j < d.terms.size(); ++j) se += d.explained[j] + d.unexplained[j];
        CHECK(std::abs(se - d.gap) <= 1e-10);
      }
      std::ostringstream md, csv;
      write_oaxaca_markdown(md, r);
      write_oaxaca_csv(csv, r);
      CHECK(md.str().find("Explained") != std::string::npos);
    }
  }

  TEST_CASE("normal p-values and stars") {
    CHECK(normal_p_value(0.0) == doctest::Approx(1.0));
    CHECK(normal_p_value(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(significance_stars(0.005) == "***");
    CHECK(significance_stars(0.03) == "**");
    CHECK(significance_stars(0.07) == "*");
    CHECK(significance_stars(0.2) == "");
  }

  TEST_CASE("markdown renders SEs in parentheses") {
    FitResult f;
    f.spec_name = "M1";
    f.terms = {"(Intercept)", "ahc:d"};
    f.coefficients = {12.0, 0.1234};
    f.std_errors = {0.1, 0.0101};
    f.p_values = {0.0, 0.0};
    f.n_obs = 1000;
    f.r_squared = 0.284;
    std::ostringstream md;
    write_fits_markdown(md, {f}, "Progressive specifications");
    CHECK(md.str().find("0.123***") != std::string::npos);
    CHECK(md.str().find("(0.010)") != std::string::npos);
    CHECK(pretty_term("ahc:d") == "H^A x D");
  }
}
