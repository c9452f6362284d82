// SPDX-License-Identifier: Apache-2.0

#include "augmincer/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "augmincer/config.hpp"
#include "augmincer/crosswalk.hpp"
#include "augmincer/csv.hpp"
#include "augmincer/econometrics.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/hashing.hpp"
#include "augmincer/index_builder.hpp"
#include "augmincer/parallel.hpp"
#include "augmincer/report.hpp"
#include "augmincer/robustness.hpp"
#include "augmincer/scoring.hpp"
#include "augmincer/synthetic.hpp"
#include "augmincer/text.hpp"
#include "augmincer/validation.hpp"

namespace augmincer::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const csv::FormatError*>(&e)) return kExitValidation;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  // IoError, filesystem errors and anything unexpected.
  return kExitIo;
}

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out = "out";
  bool quiet = false;
  std::size_t jobs = default_jobs();
};

/// State of one subcommand invocation: resolved config, output directory,
/// recorded inputs. Every file it writes lies under `out`.
class Run {
 public:
  Run(std::string command, const Globals& g, std::ostream& err)
      : command_(std::move(command)), out_(g.out), quiet_(g.quiet), jobs_(std::max<std::size_t>(g.jobs, 1)),
        err_(err) {
    if (!g.config.empty()) {
      cfg_ = config::load_config(g.config);
      config_file_ = g.config;
    } else {
      cfg_ = config::default_config();
    }
    seed_ = g.seed_given ? g.seed : cfg_.seed.value_or(1);
    for (const auto& n : cfg_.notes) log(n);
    fs::create_directories(out_);
  }

  const config::Config& cfg() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t jobs() const { return jobs_; }
  const fs::path& out() const { return out_; }

  void log(std::string_view msg) const {
    if (!quiet_) err_ << "[" << kToolName << " " << command_ << "] " << msg << '\n';
  }

  /// Opens `rel` under the output directory, creating parents.
  template <typename Fn>
  void write(const std::string& rel, Fn&& fn) {
    const fs::path p = out_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream o(p, std::ios::binary);
    if (!o) throw IoError("cannot write " + p.string());
    fn(o);
    o.flush();
    if (!o) throw IoError("write failed for " + p.string());
  }

  void write_json(const std::string& rel, const ojson& j) {
    write(rel, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  /// Path for a `paths` key, falling back to `fallback` under --out when the
  /// key is unset and an earlier step produced that file.
  std::optional<fs::path> resolve(std::string_view key, std::string_view fallback = {}) const {
    if (auto p = cfg_.path(key)) return p;
    if (!fallback.empty() && fs::exists(out_ / fallback)) return out_ / fallback;
    return std::nullopt;
  }

  fs::path require(std::string_view key, std::string_view fallback = {}) const {
    if (auto p = resolve(key, fallback)) return *p;
    if (fallback.empty()) throw ValidationError(fmt::format("missing config key paths.{}", key));
    throw ValidationError(
        fmt::format("missing config key paths.{} (and no {} from an earlier step in {})", key, fallback, out_.string()));
  }

  /// Reads and hashes an input file, recording it in the manifest.
  std::string read(std::string_view label, const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string data = ss.str();
    inputs_[std::string(label)] = {{"path", display(p)}, {"sha256", sha256_hex(data)}};
    return data;
  }

  /// Merges this command's record into out/manifest.json together with the
  /// hashes of every file currently in the output tree.
  void finish() {
    const fs::path mpath = out_ / "manifest.json";
    ojson manifest;
    if (fs::exists(mpath)) {
      std::ifstream in(mpath);
      manifest = ojson::parse(in, nullptr, false);
      if (manifest.is_discarded() || !manifest.is_object()) manifest = ojson::object();
    }
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    ojson record;
    record["seed"] = seed_;
    record["config_file"] = config_file_.empty() ? ojson(nullptr) : ojson(fs::path(config_file_).filename().string());
    record["config"] = cfg_.snapshot;
    ojson inputs = ojson::object();
    for (const auto& [k, v] : inputs_) inputs[k] = v;
    record["inputs"] = inputs;
    manifest["commands"][command_] = record;

    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(out_))
      if (e.is_regular_file() && e.path() != mpath) files.push_back(fs::relative(e.path(), out_).generic_string());
    std::sort(files.begin(), files.end());
    ojson tree = ojson::object();
    for (const auto& f : files) tree[f] = sha256_file(out_ / f);
    manifest["tree"] = tree;
    write_json("manifest.json", manifest);
  }

 private:
  std::string command_;
  fs::path out_;
  bool quiet_;
  std::size_t jobs_;
  std::ostream& err_;
  config::Config cfg_;
  std::string config_file_;
  std::uint64_t seed_ = 1;
  std::map<std::string, ojson> inputs_;

  std::string display(const fs::path& p) const {
    const auto rel = fs::relative(p, out_);
    if (!rel.empty() && *rel.begin() != "..") return "<out>/" + rel.generic_string();
    if (!cfg_.base_dir.empty()) {
      const auto r = fs::relative(p, cfg_.base_dir);
      if (!r.empty()) return r.generic_string();
    }
    return p.generic_string();
  }
};

std::istringstream stream_of(std::string data) { return std::istringstream(std::move(data)); }

AnalysisTable load_analysis(Run& run) {
  const auto p = run.require("analysis", "indices/analysis.csv");
  auto in = stream_of(run.read("analysis", p));
  AnalysisTable t = read_table_csv(in, kDefaultTextColumns);
  run.log(fmt::format("analysis table: {} rows", t.rows()));
  return t;
}

std::vector<OccupationIndex> load_indices(Run& run) {
  const auto p = run.require("indices", "indices/indices.csv");
  auto in = stream_of(run.read("indices", p));
  return read_index_csv(in);
}

robust::LadderOptions ladder_options(const config::Config& c) {
  robust::LadderOptions o;
  o.covariance = c.model.covariance;
  if (!c.model.weights.empty()) o.weights_field = c.model.weights;
  o.sector_field = c.model.sector_field;
  return o;
}

econ::ModelSpec base_spec(const config::Config& c) { return robust::ladder_spec(c.model.base_spec, ladder_options(c)); }

std::vector<econ::Term> terms_of(const std::vector<std::string>& labels) {
  std::vector<econ::Term> out;
  for (const auto& l : labels) out.push_back(econ::parse_term(l));
  return out;
}

bool has(const std::vector<std::string>& v, std::string_view s) { return std::find(v.begin(), v.end(), s) != v.end(); }

void write_fits(Run& run, const std::string& stem, const std::vector<FitResult>& fits, const std::string& title) {
  run.write(stem + ".csv", [&](std::ostream& o) { econ::write_fits_csv(o, fits); });
  run.write(stem + ".md", [&](std::ostream& o) { econ::write_fits_markdown(o, fits, title); });
  nlohmann::json j = fits;
  run.write(stem + ".json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

// --- score ------------------------------------------------------------------

void cmd_score(Run& run) {
  const auto& c = run.cfg();
  auto in = stream_of(run.read("tasks", run.require("tasks")));
  const auto tasks = scoring::read_task_csv(in);
  std::string tmpl(scoring::kDefaultTemplate);
  if (auto p = c.path("prompt")) tmpl = run.read("prompt", *p);

  std::vector<scoring::ScoreRequest> requests;
  for (const auto& t : tasks) requests.push_back(scoring::make_request(t.task_id, t.statement, tmpl));

  std::unique_ptr<scoring::ScorerBackend> backend;
  if (c.scoring.backend == "http")
    backend = std::make_unique<scoring::HttpBackend>(c.scoring.http);
  else
    backend = std::make_unique<scoring::MockBackend>(run.seed(), c.scoring.mock);

  // Live backends go through a response cache inside the run directory; the
  // mock is deterministic and needs none.
  std::unique_ptr<scoring::ResponseCache> cache;
  if (!backend->deterministic()) cache = std::make_unique<scoring::ResponseCache>(run.out() / "indices/score_cache.jsonl");

  scoring::BatchOptions opts;
  opts.parallelism = std::min(c.scoring.parallelism, run.jobs());
  opts.max_attempts = c.scoring.max_attempts;
  opts.initial_backoff = std::chrono::milliseconds(c.scoring.backoff_ms);
  run.log(fmt::format("scoring {} tasks with the {} backend", requests.size(), backend->name()));
  const auto result = scoring::score_batch(requests, *backend, cache.get(), opts);

  std::vector<TaskScore> scores;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!result.scores[i]) continue;
    TaskScore s;
    s.task_id = tasks[i].task_id;
    s.occupation_code = tasks[i].occupation_code;
    s.augmentation = result.scores[i]->augmentation;
    s.substitution = result.scores[i]->substitution;
    s.aug_type = result.scores[i]->aug_type;
    s.importance = tasks[i].importance;
    scores.push_back(std::move(s));
  }
  run.write("indices/tasks.csv", [&](std::ostream& o) { scoring::write_score_csv(o, scores); });
  ojson failures = ojson::array();
  for (const auto& f : result.failures)
    failures.push_back({{"index", f.index}, {"task_id", f.task_id}, {"attempts", f.attempts}, {"message", f.message}});
  run.write_json("indices/scoring_report.json", {{"backend", backend->name()},
                                                 {"n_tasks", tasks.size()},
                                                 {"n_scored", scores.size()},
                                                 {"failures", failures}});
  if (!result.failures.empty()) run.log(fmt::format("{} tasks failed; see indices/scoring_report.json", result.failures.size()));
}

// --- build-index ------------------------------------------------------------

std::map<CellKey, double> read_largefirm(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  std::map<CellKey, double> out;
  if (!reader.next(row)) return out;
  const csv::Header h(row);
  const auto s = h.find("sector_code"), g = h.find("occgroup_code"), v = h.find("largefirm_share");
  if (!s || !v) throw ValidationError("largefirm CSV needs sector_code and largefirm_share columns");
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    if (row.size() != h.size())
      throw ValidationError(fmt::format("largefirm CSV line {}: wrong field count", reader.record_line()));
    const auto share = text::parse_double(row[*v]);
    if (!share || *share < 0.0 || *share > 1.0)
      throw ValidationError(fmt::format("largefirm CSV line {}: share must lie in [0, 1]", reader.record_line()));
    out[{std::string(text::trim(row[*s])), g ? std::string(text::trim(row[*g])) : std::string()}] = *share;
  }
  return out;
}

void cmd_build_index(Run& run) {
  const auto& c = run.cfg();
  auto sin = stream_of(run.read("scores", run.require("scores", "indices/tasks.csv")));
  const auto scores = scoring::read_score_csv(sin);

  IndexConfig ic;
  ic.variant = c.index.variant;
  ic.standardize = c.index.standardize;
  if (c.index.employment_weighted) {
    auto ein = stream_of(run.read("employment", run.require("employment")));
    ic.standardization_weights = validation::read_score_map_csv(ein);
  }
  const auto idx = compute_index(scores, ic);
  run.write("indices/indices.csv", [&](std::ostream& o) { write_index_csv(o, idx.indices); });
  run.write_json("indices/index_report.json", {{"variant", std::string(to_string(c.index.variant))},
                                               {"n_tasks", scores.size()},
                                               {"n_occupations", idx.indices.size()},
                                               {"omitted", idx.omitted}});
  run.log(fmt::format("{} occupation indices", idx.indices.size()));

  const auto wpath = c.path("workers");
  if (!wpath) {
    run.log("paths.workers unset; skipping adoption cells and the analysis table");
    return;
  }
  auto win = stream_of(run.read("workers", *wpath));
  const auto ingest = ingest_workers(win, c.schema);
  run.write("indices/ingest_report.json", [&](std::ostream& o) { o << ingest.report.to_json().dump(2) << '\n'; });
  if (!ingest.report.parse_errors.empty())
    run.log(fmt::format("{} malformed worker rows skipped", ingest.report.parse_errors.size()));

  std::vector<AdoptionCell> cells;
  if (auto cp = c.path("cells")) {
    auto cin = stream_of(run.read("cells", *cp));
    cells = read_cells_csv(cin);
  } else {
    std::map<CellKey, double> largefirm;
    if (auto lp = c.path("largefirm")) {
      auto lin = stream_of(run.read("largefirm", *lp));
      largefirm = read_largefirm(lin);
    }
    cells = aggregate_cells(ingest.workers, c.index.occgroup_digits, largefirm);
  }
  auto proxy = compute_d_proxy(cells, c.d_proxy);
  for (const auto& w : proxy.warnings) run.log(w);
  run.write("indices/cells.csv", [&](std::ostream& o) { write_cells_csv(o, proxy.cells); });

  std::map<std::string, OccupationIndex> by_code;
  for (const auto& o : idx.indices) by_code.emplace(o.occupation_code, o);
  AttachOptions ao;
  ao.d_transform = c.index.d_transform;
  ao.occgroup_digits = c.index.occgroup_digits;
  const auto attached = attach_indices(ingest.workers, by_code, index_cells(proxy.cells), ao);
  run.write("indices/analysis.csv", [&](std::ostream& o) { write_table_csv(o, attached.table); });
  run.write("indices/join_report.json", [&](std::ostream& o) { o << attached.report.to_json().dump(2) << '\n'; });
  run.log(fmt::format("analysis table: {} rows, {} matched to an occupation", attached.report.rows,
                      attached.report.matched_occupation));
}

// --- crosswalk --------------------------------------------------------------

void cmd_crosswalk(Run& run) {
  const auto& c = run.cfg();
  auto ain = stream_of(run.read("crosswalk_ab", run.require("crosswalk_ab")));
  auto edges = crosswalk::read_csv(ain);
  ojson report;
  if (auto bp = c.path("crosswalk_bc")) {
    auto bin = stream_of(run.read("crosswalk_bc", *bp));
    const auto chained = crosswalk::chain(edges, crosswalk::read_csv(bin));
    edges = chained.edges;
    report["unmapped"] = chained.unmapped;
  }
  report["n_edges"] = edges.size();
  if (auto ep = c.path("employment")) {
    auto ein = stream_of(run.read("employment", *ep));
    report["coverage"] = ojson::parse(crosswalk::coverage(edges, validation::read_score_map_csv(ein)).to_json().dump());
  }
  run.write("indices/crosswalk.csv", [&](std::ostream& o) { crosswalk::write_csv(o, edges); });
  run.write_json("indices/crosswalk_report.json", report);
}

// --- validate ---------------------------------------------------------------

/// One external index per two-column file, named by the file stem.
std::vector<validation::ExternalRow> external_rows(Run& run, const std::vector<OccupationIndex>& indices) {
  std::map<std::string, double> ahc;
  for (const auto& o : indices) ahc[o.occupation_code] = o.ahc_raw;
  std::map<std::string, std::map<std::string, double>> external;
  for (const auto& p : run.cfg().path_list("external")) {
    const std::string name = p.stem().string();
    if (external.count(name)) throw ValidationError("duplicate external index name " + name);
    auto in = stream_of(run.read("external:" + name, p));
    external[name] = validation::read_score_map_csv(in);
  }
  return validation::external_validation_report(ahc, external);
}

void cmd_validate(Run& run) {
  const auto& c = run.cfg();
  bool did = false;
  if (!c.path_list("external").empty()) {
    const auto rows = external_rows(run, load_indices(run));
    run.write("indices/external_validation.csv", [&](std::ostream& o) { validation::write_external_csv(o, rows); });
    run.write("indices/external_validation.md", [&](std::ostream& o) { validation::write_external_markdown(o, rows); });
    did = true;
  }
  if (auto sp = c.path("second_rater")) {
    auto pin = stream_of(run.read("scores", run.require("scores", "indices/tasks.csv")));
    auto sin = stream_of(run.read("second_rater", *sp));
    const auto primary = scoring::read_score_csv(pin);
    std::map<std::string, double> second;
    for (const auto& s : scoring::read_score_csv(sin)) second[s.task_id] = s.augmentation;
    std::vector<double> a, b;
    for (const auto& s : primary)
      if (auto it = second.find(s.task_id); it != second.end()) {
        a.push_back(s.augmentation);
        b.push_back(it->second);
      }
    const auto r = validation::reliability(a, b, true);
    run.write_json("indices/reliability.json", {{"n_pairs", r.n_pairs},
                                                {"pearson", r.pearson_r},
                                                {"spearman", r.spearman_rho},
                                                {"krippendorff_alpha", r.krippendorff_alpha},
                                                {"level_bias", r.level_bias}});
    did = true;
  }
  if (!did) throw ValidationError("missing config key paths.external or paths.second_rater");
}

// --- estimate ---------------------------------------------------------------

std::vector<FitResult> fit_quantiles(const AnalysisTable& t, const econ::ModelSpec& spec, const std::vector<double>& taus,
                                     std::size_t jobs) {
  std::vector<FitResult> fits(taus.size());
  parallel_for(taus.size(), jobs, [&](std::size_t i) {
    fits[i] = econ::fit_quantile(t, spec, taus[i]);
    fits[i].spec_name = fmt::format("q{}", text::format_fixed(taus[i], 2));
  });
  return fits;
}

std::pair<AnalysisTable, AnalysisTable> split_binary(const AnalysisTable& t, const std::string& field) {
  const auto& g = t.numeric(field);
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == 1.0) a.push_back(i);
    else if (g[i] == 0.0) b.push_back(i);
  }
  return {t.select_rows(a), t.select_rows(b)};
}

void cmd_estimate(Run& run, std::vector<std::string> estimators) {
  const auto& c = run.cfg();
  if (estimators.empty()) estimators = c.model.estimators;
  const AnalysisTable t = load_analysis(run);
  const auto lo = ladder_options(c);

  if (has(estimators, "progressive")) {
    std::vector<econ::ModelSpec> specs;
    for (const auto& n : c.model.specs) specs.push_back(robust::ladder_spec(n, lo));
    std::vector<FitResult> fits(specs.size());
    parallel_for(specs.size(), run.jobs(), [&](std::size_t i) { fits[i] = econ::fit(t, specs[i]); });
    write_fits(run, "fits/progressive", fits, "Augmented Mincer equation: progressive specifications");
    run.log(fmt::format("{} progressive specifications", fits.size()));
  }
  if (has(estimators, "spec")) {
    if (c.model.terms.empty()) throw ValidationError("missing config key model.terms");
    econ::ModelSpec s;
    s.name = "custom";
    s.terms = econ::parse_terms(c.model.terms);
    s.covariance = c.model.covariance;
    if (!c.model.weights.empty()) s.weights_field = c.model.weights;
    if (!c.model.filter.empty()) s.filter = econ::parse_filter(c.model.filter);
    if (!c.model.fixed_effects.empty()) s.fixed_effects = c.model.fixed_effects;
    write_fits(run, "fits/custom", {econ::fit(t, s)}, "Custom specification");
  }
  if (has(estimators, "quantile")) {
    const auto fits = fit_quantiles(t, base_spec(c), c.model.quantiles, run.jobs());
    run.write("fits/quantile.csv", [&](std::ostream& o) { econ::write_fits_csv(o, fits); });
    run.write("fits/quantile.md", [&](std::ostream& o) { report::write_quantile_markdown(o, c.model.quantiles, fits); });
    run.log(fmt::format("{} quantile fits", fits.size()));
  }
  if (has(estimators, "iv")) {
    if (c.model.iv_instruments.empty()) throw ValidationError("missing config key model.iv_instruments");
    auto spec = base_spec(c);
    spec.name = spec.name + " 2SLS";
    const auto r = econ::fit_tsls(t, spec, terms_of(c.model.iv_endogenous), terms_of(c.model.iv_instruments));
    write_fits(run, "fits/iv", {r.fit}, "Two-stage least squares");
    ojson first = ojson::object();
    for (std::size_t j = 0; j < r.first_stage_f.size(); ++j) first[c.model.iv_endogenous[j]] = r.first_stage_f[j];
    run.write_json("fits/iv_first_stage.json", {{"instruments", c.model.iv_instruments}, {"first_stage_f", first}});
    for (const auto& w : r.fit.warnings) run.log(w);
  }
  if (has(estimators, "oaxaca")) {
    auto spec = base_spec(c);
    const auto& g = c.model.oaxaca_group;
    std::erase_if(spec.terms, [&](const econ::Term& term) { return has(term.factors, g); });
    spec.filter = {};
    spec.fixed_effects.reset();
    const auto [a, b] = split_binary(t, g);
    const auto r = econ::oaxaca_blinder(a, b, spec, c.model.oaxaca_reference);
    run.write("fits/oaxaca.csv", [&](std::ostream& o) { econ::write_oaxaca_csv(o, r); });
    run.write("fits/oaxaca.md", [&](std::ostream& o) { econ::write_oaxaca_markdown(o, r); });
  }
}

// --- robustness -------------------------------------------------------------

std::vector<robust::SubgroupRow> heterogeneity_rows(const AnalysisTable& t, const econ::ModelSpec& spec,
                                                    const std::vector<std::string>& splits, std::size_t jobs) {
  std::vector<robust::SubgroupRow> rows;
  for (const auto& s : splits) {
    auto part = robust::heterogeneity(t, spec, robust::parse_split(s), jobs);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void cmd_robustness(Run& run, std::vector<std::string> analyses) {
  const auto& c = run.cfg();
  if (analyses.empty()) analyses = c.robustness.analyses;
  const AnalysisTable t = load_analysis(run);
  const auto spec = base_spec(c);
  const auto& term = c.robustness.term;

  if (has(analyses, "placebo")) {
    robust::PlaceboOptions po;
    po.n_perm = c.robustness.n_perm;
    po.seed = run.seed();
    po.jobs = run.jobs();
    po.term = term;
    const auto r = robust::placebo_permutation(t, spec, po);
    run.write("robustness/placebo.csv", [&](std::ostream& o) { robust::write_placebo_csv(o, r); });
    run.write("robustness/placebo.md", [&](std::ostream& o) { robust::write_placebo_markdown(o, r); });
    run.log(fmt::format("placebo p = {}", text::format_fixed(r.p_value, 3)));
  }
  if (has(analyses, "jackknife")) {
    const auto r = robust::jackknife_loso(t, spec, c.model.sector_field, term, run.jobs());
    run.write("robustness/jackknife.csv", [&](std::ostream& o) { robust::write_jackknife_csv(o, r); });
    run.write("robustness/jackknife.md", [&](std::ostream& o) { robust::write_jackknife_markdown(o, r); });
    run.log(fmt::format("jackknife: {} sign changes", r.sign_changes));
  }
  if (has(analyses, "heterogeneity")) {
    const auto rows = heterogeneity_rows(t, spec, c.robustness.splits, run.jobs());
    run.write("robustness/heterogeneity.csv", [&](std::ostream& o) { robust::write_heterogeneity_csv(o, rows, term); });
    run.write("robustness/heterogeneity.md",
              [&](std::ostream& o) { robust::write_heterogeneity_markdown(o, rows, term); });
  }
  if (has(analyses, "triple")) {
    const auto f = robust::triple_interaction(t, ladder_options(c));
    write_fits(run, "robustness/triple", {f}, "Triple interaction with formality");
  }
  if (has(analyses, "weighted")) {
    auto lo = ladder_options(c);
    lo.weights_field = std::string(col::kWeight);
    auto ws = robust::ladder_spec(c.model.base_spec, lo);
    ws.name += " weighted";
    write_fits(run, "robustness/weighted", {econ::fit(t, spec), econ::fit(t, ws)}, "Unweighted and weighted estimates");
  }
}

// --- simulate ---------------------------------------------------------------

void cmd_simulate(Run& run, std::optional<std::size_t> recovery_seeds) {
  const auto& c = run.cfg();
  synth::EconomyParams params = c.simulation.economy;
  params.seed = run.seed();
  const auto pop = synth::generate_population(params);
  synth::write_population((run.out() / "indices").string(), pop, params);
  run.log(fmt::format("generated {} workers in {} occupations", pop.workers.size(), pop.indices.size()));

  const auto mp = synth::marginal_product_check(params.production, params.hardware, synth::SoftwareInputs{1.0, 1.0, 1.0});
  run.write_json("indices/production_check.json", {{"dy_dha", mp.dy_dha},
                                                   {"dy_dhc", mp.dy_dhc},
                                                   {"ratio", mp.ratio},
                                                   {"fd_dha", mp.fd_dha},
                                                   {"fd_dhc", mp.fd_dhc},
                                                   {"premise_holds", mp.premise_holds}});

  const std::size_t n_seeds = recovery_seeds.value_or(c.simulation.recovery_seeds);
  if (n_seeds == 0) return;
  synth::RecoveryOptions ro;
  ro.n_seeds = n_seeds;
  ro.first_seed = run.seed();
  ro.jobs = run.jobs();
  ro.placebo_permutations = c.simulation.placebo_permutations;
  run.log(fmt::format("recovery harness over {} seeds", n_seeds));
  const auto rep = synth::recovery_harness(params, ro);
  run.write("robustness/recovery.csv", [&](std::ostream& o) { synth::write_recovery_csv(o, rep); });
  run.write("robustness/recovery.md", [&](std::ostream& o) { synth::write_recovery_markdown(o, rep); });
  run.write_json("robustness/recovery.json", rep.to_json());
}

// --- report -----------------------------------------------------------------

void cmd_report(Run& run) {
  const auto& c = run.cfg();
  const AnalysisTable t = load_analysis(run);
  const auto indices = load_indices(run);
  const auto lo = ladder_options(c);
  const auto spec = base_spec(c);
  const auto& term = c.robustness.term;

  std::vector<econ::ModelSpec> specs;
  for (const auto& n : c.model.specs) specs.push_back(robust::ladder_spec(n, lo));
  std::vector<FitResult> fits(specs.size());
  parallel_for(specs.size(), run.jobs(), [&](std::size_t i) { fits[i] = econ::fit(t, specs[i]); });
  const auto het = heterogeneity_rows(t, spec, c.robustness.splits, run.jobs());
  const auto qfits = fit_quantiles(t, spec, c.model.quantiles, run.jobs());
  const auto curve = report::quantile_curve(c.model.quantiles, qfits);
  const auto bars = report::sector_bars(t, c.model.sector_field);
  const auto scatter = report::occupation_scatter(indices, t);

  std::optional<std::vector<validation::ExternalRow>> external;
  if (!c.path_list("external").empty()) external = external_rows(run, indices);

  run.write("figures/fig1_sector_ahc.csv", [&](std::ostream& o) { report::write_sector_bars_csv(o, bars); });
  run.write("figures/fig2_ahc_scatter.csv",
            [&](std::ostream& o) { report::write_scatter_csv(o, scatter, "ahc_raw", "sub_raw"); });
  if (external)
    run.write("figures/fig3_external_validation.csv",
              [&](std::ostream& o) { report::write_external_figure_csv(o, *external); });
  run.write("figures/fig4_heterogeneity.csv",
            [&](std::ostream& o) { report::write_heterogeneity_figure_csv(o, het, term); });
  run.write("figures/fig5_quantile.csv", [&](std::ostream& o) { report::write_quantile_figure_csv(o, curve); });

  if (c.report.svg) {
    std::vector<report::Bar> b1;
    for (const auto& b : bars)
      b1.push_back({b.sector, b.mean_ahc, b.above_median ? "#4477aa" : "#bbbbbb"});
    run.write("figures/fig1_sector_ahc.svg",
              [&](std::ostream& o) { report::write_bar_svg(o, "Augmentation score by sector", b1); });
    run.write("figures/fig2_ahc_scatter.svg", [&](std::ostream& o) {
      report::write_scatter_svg(o, "Augmentation vs substitution by occupation", "AHC", "SUB", scatter);
    });
    if (external) {
      std::vector<report::Bar> b3;
      for (const auto& r : *external)
        if (r.pearson) b3.push_back({r.index_name, *r.pearson, *r.pearson >= 0.0 ? "#228833" : "#ee6677"});
      run.write("figures/fig3_external_validation.svg",
                [&](std::ostream& o) { report::write_bar_svg(o, "Correlation with external indices", b3); });
    }
    std::vector<report::Bar> b4;
    for (const auto& r : het) {
      if (!r.fit) continue;
      const auto it = std::find(r.fit->terms.begin(), r.fit->terms.end(), term);
      if (it == r.fit->terms.end()) continue;
      const auto i = static_cast<std::size_t>(it - r.fit->terms.begin());
      const double p = r.fit->p_values[i], v = r.fit->coefficients[i];
      b4.push_back({r.split + ": " + r.group, v, p < 0.05 ? (v > 0.0 ? "#4477aa" : "#ee6677") : "#bbbbbb"});
    }
    run.write("figures/fig4_heterogeneity.svg",
              [&](std::ostream& o) { report::write_bar_svg(o, "Augmentation premium by subgroup", b4); });
    run.write("figures/fig5_quantile.svg", [&](std::ostream& o) { report::write_quantile_svg(o, curve); });
  }

  run.write("report.md", [&](std::ostream& o) {
    o << "# Augmented Mincer report\n\n## Descriptive statistics\n\n";
    report::write_descriptive_markdown(o, report::describe(t, report::kDescriptiveFields));
    o << "\n## Progressive specifications\n\n";
    econ::write_fits_markdown(o, fits, "Augmented Mincer equation: progressive specifications");
    o << "\n## Heterogeneity of " << econ::pretty_term(term) << "\n\n";
    robust::write_heterogeneity_markdown(o, het, term);
    o << "\n## Quantile regressions (" << spec.name << ")\n\n";
    report::write_quantile_markdown(o, c.model.quantiles, qfits);
    o << "\n## Figure data\n\n";
    o << fmt::format("- figures/fig1_sector_ahc.csv: {} sectors\n", bars.size());
    const double r = report::scatter_correlation(scatter);
    o << fmt::format("- figures/fig2_ahc_scatter.csv: {} occupations, correlation {}\n", scatter.size(),
                     std::isnan(r) ? std::string("n/a") : text::format_fixed(r, 3));
    if (external) o << fmt::format("- figures/fig3_external_validation.csv: {} indices\n", external->size());
    o << fmt::format("- figures/fig4_heterogeneity.csv: {} subgroups\n", het.size());
    o << fmt::format("- figures/fig5_quantile.csv: {} quantiles\n", curve.size());
  });
  run.log("wrote report.md and figure data");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Augmented human capital and AI augmentation premium pipeline", std::string(kToolName)};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--config", g.config, "Config file (INI)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto* score = app.add_subcommand("score", "Score task statements with the configured backend");
  auto* build = app.add_subcommand("build-index", "Occupation indices, adoption cells and the analysis table");
  auto* cw = app.add_subcommand("crosswalk", "Chain occupation crosswalks and report coverage");
  auto* val = app.add_subcommand("validate", "External validation and inter-rater reliability");
  auto* est = app.add_subcommand("estimate", "Progressive specs, custom spec, quantiles, 2SLS, Oaxaca-Blinder");
  std::vector<std::string> estimators;
  est->add_option("--estimators", estimators, "Subset of progressive,spec,quantile,iv,oaxaca")
      ->delimiter(',')
      ->check(CLI::IsMember({"progressive", "spec", "quantile", "iv", "oaxaca"}));
  auto* rob = app.add_subcommand("robustness", "Placebo, jackknife, heterogeneity, triple interaction, weighting");
  std::vector<std::string> analyses;
  rob->add_option("--analyses", analyses, "Subset of placebo,jackknife,heterogeneity,triple,weighted")
      ->delimiter(',')
      ->check(CLI::IsMember({"placebo", "jackknife", "heterogeneity", "triple", "weighted"}));
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic economy and run the recovery harness");
  std::size_t recovery_seeds_value = 0;
  auto* recovery_opt =
      sim->add_option("--recovery-seeds", recovery_seeds_value, "Override simulation.recovery_seeds (0 skips)");
  auto* rep = app.add_subcommand("report", "Markdown report and per-figure data");

  std::vector<std::string> argv{std::string(kToolName)};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }
  g.seed_given = seed_opt->count() > 0;
  std::optional<std::size_t> recovery_seeds;
  if (recovery_opt->count() > 0) recovery_seeds = recovery_seeds_value;
  if (recovery_seeds && *recovery_seeds != 0 && *recovery_seeds < 10) {
    err << "error: --recovery-seeds must be 0 or at least 10\n";
    return kExitValidation;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    Run r(sub->get_name(), g, err);
    if (sub == score) cmd_score(r);
    else if (sub == build) cmd_build_index(r);
    else if (sub == cw) cmd_crosswalk(r);
    else if (sub == val) cmd_validate(r);
    else if (sub == est) cmd_estimate(r, estimators);
    else if (sub == rob) cmd_robustness(r, analyses);
    else if (sub == sim) cmd_simulate(r, recovery_seeds);
    else if (sub == rep) cmd_report(r);
    r.finish();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace augmincer::cli
