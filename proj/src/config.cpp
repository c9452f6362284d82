// SPDX-License-Identifier: Apache-2.0

#include "augmincer/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "augmincer/robustness.hpp"
#include "augmincer/text.hpp"

namespace augmincer::config {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kEstimators[] = {"progressive", "spec", "quantile", "iv", "oaxaca"};
constexpr std::string_view kAnalyses[] = {"placebo", "jackknife", "heterogeneity", "triple", "weighted"};
constexpr std::string_view kLadder[] = {"M1", "M2", "M3", "M4", "M5", "M6"};

template <typename Range>
bool contains(const Range& r, std::string_view v) {
  return std::find(std::begin(r), std::end(r), v) != std::end(r);
}

std::optional<bool> parse_bool(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  return std::nullopt;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_finite(std::string_view s) {
  auto v = text::parse_double(s);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

std::vector<std::string> parse_list(std::string_view s) {
  std::vector<std::string> out;
  if (text::trim(s).empty()) return out;
  for (const auto& part : text::split(s, ',')) {
    auto t = std::string(text::trim(part));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

/// Binds typed targets to `[section] key` entries. Each call registers the key
/// in the schema, so anything left over in the tree is unknown.
class Binder {
 public:
  explicit Binder(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void bind(const std::string& section, const std::string& key, T& target,
            std::function<std::optional<std::string>(const T&)> check = {}) {
    sections_.insert(section);
    known_.insert(section + "." + key);
    if (auto raw = lookup(section, key)) {
      auto parsed = parse<T>(*raw);
      if (!parsed) {
        problems_.push_back(fmt::format("[{}] {}: expected {}, got '{}'", section, key, type_name<T>(), *raw));
      } else {
        target = std::move(*parsed);
      }
    }
    if (check)
      if (auto msg = check(target)) problems_.push_back(fmt::format("[{}] {}: {}", section, key, *msg));
    snapshot_[section][key] = to_json(target);
  }

  template <typename E, typename Parse, typename Show>
  void enumeration(const std::string& section, const std::string& key, E& target, Parse parse_fn, Show show,
                   std::string_view choices) {
    sections_.insert(section);
    known_.insert(section + "." + key);
    if (auto raw = lookup(section, key)) {
      if (auto v = parse_fn(*raw)) {
        target = *v;
      } else {
        problems_.push_back(fmt::format("[{}] {}: expected one of {}, got '{}'", section, key, choices, *raw));
      }
    }
    snapshot_[section][key] = std::string(show(target));
  }

  void problem(std::string msg) { problems_.push_back(std::move(msg)); }

  /// Unknown sections/keys and absent-section notes.
  void finish(std::vector<std::string>& notes) {
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        problems_.push_back(fmt::format("key '{}' outside a section", name));
        continue;
      }
      if (!sections_.count(name)) {
        problems_.push_back(fmt::format("unknown section [{}]", name));
        continue;
      }
      for (const auto& [key, value] : node)
        if (!known_.count(name + "." + key)) problems_.push_back(fmt::format("[{}] unknown key '{}'", name, key));
    }
    std::vector<std::string> absent;
    for (const auto& s : section_order_)
      if (tree_.find(s) == tree_.not_found()) absent.push_back("[" + s + "]");
    if (!absent.empty()) notes.push_back("defaults applied for absent sections " + text::join(absent, ", "));
  }

  void section(const std::string& name) { section_order_.push_back(name); }

  const std::vector<std::string>& problems() const { return problems_; }
  nlohmann::ordered_json& snapshot() { return snapshot_; }

 private:
  const pt::ptree& tree_;
  std::set<std::string> sections_;
  std::set<std::string> known_;
  std::vector<std::string> section_order_;
  std::vector<std::string> problems_;
  nlohmann::ordered_json snapshot_ = nlohmann::ordered_json::object();

  std::optional<std::string> lookup(const std::string& section, const std::string& key) const {
    auto s = tree_.find(section);
    if (s == tree_.not_found()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.not_found()) return std::nullopt;
    return std::string(text::trim(k->second.data()));
  }

  template <typename T>
  static std::optional<T> parse(const std::string& raw) {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      return parse_bool(raw);
    } else if constexpr (std::is_same_v<T, double>) {
      return parse_finite(raw);
    } else if constexpr (std::is_same_v<T, int>) {
      auto v = text::parse_int(raw);
      if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) return std::nullopt;
      return static_cast<int>(*v);
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      auto v = parse_u64(raw);
      if (!v) return std::nullopt;
      return static_cast<T>(*v);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      return parse_list(raw);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::vector<double> out;
      for (const auto& s : parse_list(raw)) {
        auto v = parse_finite(s);
        if (!v) return std::nullopt;
        out.push_back(*v);
      }
      return out;
    } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
      auto v = parse_u64(raw);
      if (!v) return std::nullopt;
      return std::optional<std::uint64_t>(*v);
    }
  }

  template <typename T>
  static std::string_view type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> ||
                  std::is_same_v<T, std::optional<std::uint64_t>>)
      return "a nonnegative integer";
    if constexpr (std::is_same_v<T, std::vector<double>>) return "a comma-separated list of numbers";
    return "a string";
  }

  template <typename T>
  static nlohmann::ordered_json to_json(const T& v) {
    if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    } else {
      return v;
    }
  }
};

std::function<std::optional<std::string>(const double&)> in_range(double lo, double hi, bool open_lo = false,
                                                                    bool open_hi = false) {
  return [=](const double& v) -> std::optional<std::string> {
    const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (ok) return std::nullopt;
    return fmt::format("{} must lie in {}{}, {}{}", text::format_double(v), open_lo ? '(' : '[', text::format_double(lo),
                       text::format_double(hi), open_hi ? ')' : ']');
  };
}

std::function<std::optional<std::string>(const std::size_t&)> at_least(std::size_t lo) {
  return [=](const std::size_t& v) -> std::optional<std::string> {
    if (v >= lo) return std::nullopt;
    return fmt::format("must be at least {}", lo);
  };
}

template <typename Range>
std::function<std::optional<std::string>(const std::vector<std::string>&)> subset_of(const Range& allowed) {
  return [&allowed](const std::vector<std::string>& v) -> std::optional<std::string> {
    for (const auto& s : v)
      if (!contains(allowed, s)) {
        std::vector<std::string> names(std::begin(allowed), std::end(allowed));
        return fmt::format("unknown entry '{}' (allowed: {})", s, text::join(names, ", "));
      }
    return std::nullopt;
  };
}

template <typename Fn>
std::optional<std::string> try_parse(Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

using PathMember = std::string Paths::*;
const std::map<std::string, PathMember, std::less<>>& path_members() {
  static const std::map<std::string, PathMember, std::less<>> m = {
      {"workers", &Paths::workers},           {"tasks", &Paths::tasks},
      {"scores", &Paths::scores},             {"indices", &Paths::indices},
      {"cells", &Paths::cells},               {"largefirm", &Paths::largefirm},
      {"crosswalk_ab", &Paths::crosswalk_ab}, {"crosswalk_bc", &Paths::crosswalk_bc},
      {"employment", &Paths::employment},     {"external", &Paths::external},
      {"second_rater", &Paths::second_rater}, {"analysis", &Paths::analysis},
      {"prompt", &Paths::prompt},
  };
  return m;
}

void bind_all(Binder& b, Config& c) {
  b.section("run");
  b.bind("run", "seed", c.seed);

  b.section("paths");
  for (const auto& [key, member] : path_members()) b.bind("paths", key, c.paths.*member);

  b.section("schema");
  for (auto f : kWorkerLogicalFields) {
    const std::string logical(f);
    b.bind<std::string>("schema", logical, c.schema.columns[logical], [](const std::string& v) {
      return v.empty() ? std::optional<std::string>("column name must not be empty") : std::nullopt;
    });
  }

  b.section("index");
  b.enumeration("index", "variant", c.index.variant, parse_index_variant,
                [](IndexVariant v) { return to_string(v); },
                "importance_weighted, raw_unweighted, binary_median, substitution_displacement");
  b.bind("index", "standardize", c.index.standardize);
  b.bind("index", "employment_weighted", c.index.employment_weighted);
  b.bind("index", "occgroup_digits", c.index.occgroup_digits, at_least(1));
  b.enumeration("index", "d_transform", c.index.d_transform, parse_d_transform,
                [](DTransform t) { return to_string(t); }, "std, log");

  b.section("d_proxy");
  b.bind("d_proxy", "formality", c.d_proxy.formality);
  b.bind("d_proxy", "education", c.d_proxy.education);
  b.bind("d_proxy", "income", c.d_proxy.income);
  b.bind("d_proxy", "largefirm", c.d_proxy.largefirm);

  auto& m = c.model;
  b.section("model");
  b.bind("model", "estimators", m.estimators, subset_of(kEstimators));
  b.bind("model", "specs", m.specs, subset_of(kLadder));
  b.enumeration("model", "covariance", m.covariance, parse_covariance,
                [](CovarianceType t) { return to_string(t); }, "classical, hc0, hc1");
  b.bind("model", "weights", m.weights);
  b.bind("model", "sector_field", m.sector_field);
  b.bind<std::string>("model", "terms", m.terms, [](const std::string& v) {
    return v.empty() ? std::nullopt : try_parse([&] { econ::parse_terms(v); });
  });
  b.bind<std::string>("model", "filter", m.filter, [](const std::string& v) {
    return v.empty() ? std::nullopt : try_parse([&] { econ::parse_filter(v); });
  });
  b.bind("model", "fixed_effects", m.fixed_effects);
  b.bind<std::string>("model", "base_spec", m.base_spec, [](const std::string& v) -> std::optional<std::string> {
    if (contains(kLadder, v)) return std::nullopt;
    return "must be one of M1..M6";
  });
  b.bind<std::vector<double>>("model", "quantiles", m.quantiles,
                              [](const std::vector<double>& v) -> std::optional<std::string> {
                                for (double t : v)
                                  if (!(t > 0.0 && t < 1.0))
                                    return fmt::format("quantile {} must lie in (0, 1)", text::format_double(t));
                                return std::nullopt;
                              });
  b.bind("model", "oaxaca_group", m.oaxaca_group);
  b.enumeration("model", "oaxaca_reference", m.oaxaca_reference, econ::parse_oaxaca_reference,
                [](econ::OaxacaReference r) { return econ::to_string(r); }, "a, b, pooled");
  auto terms_check = [](const std::vector<std::string>& v) -> std::optional<std::string> {
    for (const auto& t : v)
      if (auto e = try_parse([&] { econ::parse_term(t); })) return e;
    return std::nullopt;
  };
  b.bind<std::vector<std::string>>("model", "iv_endogenous", m.iv_endogenous, terms_check);
  b.bind<std::vector<std::string>>("model", "iv_instruments", m.iv_instruments, terms_check);

  auto& r = c.robustness;
  b.section("robustness");
  b.bind("robustness", "analyses", r.analyses, subset_of(kAnalyses));
  b.bind("robustness", "n_perm", r.n_perm, at_least(99));
  b.bind<std::vector<std::string>>("robustness", "splits", r.splits, [](const std::vector<std::string>& v) {
    std::optional<std::string> err;
    for (const auto& s : v)
      if (!err) err = try_parse([&] { robust::parse_split(s); });
    return err;
  });
  b.bind<std::string>("robustness", "term", r.term,
                      [](const std::string& v) { return try_parse([&] { econ::parse_term(v); }); });

  auto& s = c.scoring;
  b.section("scoring");
  b.bind<std::string>("scoring", "backend", s.backend, [](const std::string& v) -> std::optional<std::string> {
    if (v == "mock" || v == "http") return std::nullopt;
    return "expected mock or http";
  });
  b.bind("scoring", "parallelism", s.parallelism, at_least(1));
  b.bind<int>("scoring", "max_attempts", s.max_attempts, [](const int& v) -> std::optional<std::string> {
    if (v >= 1) return std::nullopt;
    return "must be at least 1";
  });
  b.bind<int>("scoring", "backoff_ms", s.backoff_ms, [](const int& v) -> std::optional<std::string> {
    if (v >= 0) return std::nullopt;
    return "must be nonnegative";
  });
  b.bind("scoring", "mock_aug_mean", s.mock.aug_mean, in_range(0.0, 100.0));
  b.bind("scoring", "mock_aug_sd", s.mock.aug_sd, in_range(0.0, 100.0, true));
  b.bind("scoring", "mock_sub_mean", s.mock.sub_mean, in_range(0.0, 100.0));
  b.bind("scoring", "mock_sub_sd", s.mock.sub_sd, in_range(0.0, 100.0, true));
  b.bind("scoring", "endpoint", s.http.endpoint);
  b.bind("scoring", "model", s.http.model);
  b.bind("scoring", "auth_env", s.http.auth_env);
  b.bind("scoring", "auth_header", s.http.auth_header);
  b.bind("scoring", "auth_prefix", s.http.auth_prefix);
  b.bind("scoring", "response_pointer", s.http.response_pointer);
  b.bind<int>("scoring", "timeout_seconds", s.http.timeout_seconds, [](const int& v) -> std::optional<std::string> {
    if (v >= 1) return std::nullopt;
    return "must be at least 1";
  });

  auto& e = c.simulation.economy;
  auto& tb = e.true_beta;
  b.section("simulation");
  b.bind("simulation", "n_workers", e.n_workers);
  b.bind("simulation", "n_occupations", e.n_occupations);
  b.bind("simulation", "n_sectors", e.n_sectors);
  b.bind("simulation", "n_occgroups", e.n_occgroups);
  b.bind("simulation", "formal_share", e.formal_share);
  b.bind("simulation", "female_share", e.female_share);
  b.bind("simulation", "urban_share", e.urban_share);
  b.bind("simulation", "missing_education_share", e.missing_education_share);
  b.bind("simulation", "noise_sd", e.noise_sd);
  b.bind("simulation", "heteroskedastic", e.heteroskedastic);
  b.enumeration("simulation", "informal_d", e.informal_d, synth::parse_informal_d,
                [](synth::InformalD d) { return synth::to_string(d); }, "uniform, zero, cell");
  b.enumeration("simulation", "d_transform", e.d_transform, parse_d_transform,
                [](DTransform t) { return to_string(t); }, "std, log");
  b.bind("simulation", "phi_bar", e.production.phi_bar);
  b.bind("simulation", "lambda", e.production.lambda);
  b.bind("simulation", "sigma_f", e.production.sigma_f);
  b.bind("simulation", "capital_share", e.production.capital_share);
  b.bind("simulation", "hardware_weight", e.production.hardware_weight);
  b.bind("simulation", "tfp", e.production.tfp);
  b.bind("simulation", "alpha", tb.alpha);
  b.bind("simulation", "beta_educ", tb.educ);
  b.bind("simulation", "beta_exper", tb.exper);
  b.bind("simulation", "beta_exper2", tb.exper2);
  b.bind("simulation", "beta1", tb.beta1);
  b.bind("simulation", "beta_c", tb.beta_c);
  b.bind("simulation", "beta_d", tb.beta_d);
  b.bind("simulation", "beta2", tb.beta2);
  b.bind("simulation", "beta3", tb.beta3);
  b.bind("simulation", "beta_female", tb.female);
  b.bind("simulation", "beta_urban", tb.urban);
  b.bind("simulation", "beta_formal", tb.formal);
  b.bind<std::size_t>("simulation", "recovery_seeds", c.simulation.recovery_seeds,
                      [](const std::size_t& v) -> std::optional<std::string> {
                        if (v == 0 || v >= 10) return std::nullopt;
                        return "must be 0 (skip) or at least 10";
                      });
  b.bind<std::size_t>("simulation", "placebo_permutations", c.simulation.placebo_permutations,
                      [](const std::size_t& v) -> std::optional<std::string> {
                        if (v == 0 || v >= 99) return std::nullopt;
                        return "must be 0 (skip) or at least 99";
                      });

  b.section("report");
  b.bind("report", "svg", c.report.svg);
}

void cross_checks(Binder& b, const Config& c) {
  if (auto e = try_parse([&] { c.d_proxy.validate(); })) b.problem("[d_proxy] " + *e);
  if (auto e = try_parse([&] { c.simulation.economy.validate(); })) b.problem("[simulation] " + *e);
  if (contains(c.model.estimators, "spec") && c.model.terms.empty())
    b.problem("[model] terms: required when estimators include 'spec'");
  if (contains(c.model.estimators, "iv") && c.model.iv_instruments.empty())
    b.problem("[model] iv_instruments: required when estimators include 'iv'");
  if (c.model.iv_instruments.size() < c.model.iv_endogenous.size() && !c.model.iv_instruments.empty())
    b.problem("[model] iv_instruments: fewer instruments than endogenous terms");
  if (c.scoring.backend == "http" && c.scoring.http.endpoint.empty())
    b.problem("[scoring] endpoint: required for the http backend");
}

/// Whole-line `#` comments become `;` comments, which the INI reader skips.
/// A `#` or `;` preceded by whitespace starts an inline comment.
std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto& line : text::split(text, '\n')) {
    const auto t = text::trim(line);
    if (!t.empty() && (t.front() == '#' || t.front() == ';')) {
      out += ";\n";
      continue;
    }
    std::size_t cut = line.size();
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        cut = i;
        break;
      }
    }
    out += text::trim(std::string_view(line).substr(0, cut));
    out += '\n';
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : ValidationError("invalid config:\n  " + text::join(problems, "\n  ")), problems_(std::move(problems)) {}

std::optional<std::filesystem::path> Config::path(std::string_view key) const {
  const auto it = path_members().find(key);
  if (it == path_members().end()) throw ValidationError(fmt::format("unknown path key paths.{}", key));
  const std::string& v = paths.*(it->second);
  if (v.empty()) return std::nullopt;
  const std::filesystem::path p(v);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path Config::require_path(std::string_view key) const {
  if (auto p = path(key)) return *p;
  throw ValidationError(fmt::format("missing config key paths.{}", key));
}

std::vector<std::filesystem::path> Config::path_list(std::string_view key) const {
  const auto it = path_members().find(key);
  if (it == path_members().end()) throw ValidationError(fmt::format("unknown path key paths.{}", key));
  std::vector<std::filesystem::path> out;
  for (const auto& v : parse_list(paths.*(it->second))) {
    const std::filesystem::path p(v);
    out.push_back(p.is_absolute() ? p : base_dir / p);
  }
  return out;
}

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(strip_comments(text));
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({fmt::format("line {}: {}", e.line(), e.message())});
  }
  Config c;
  c.base_dir = base_dir;
  Binder b(tree);
  bind_all(b, c);
  b.finish(c.notes);
  cross_checks(b, c);
  if (!b.problems().empty()) throw ConfigError(b.problems());
  c.snapshot = std::move(b.snapshot());
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

Config default_config() { return parse_config(""); }

}  // namespace augmincer::config
