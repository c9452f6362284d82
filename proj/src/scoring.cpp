// SPDX-License-Identifier: Apache-2.0

#include "augmincer/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include "augmincer/csv.hpp"
#include "augmincer/hashing.hpp"
#include "augmincer/text.hpp"

namespace augmincer::scoring {

const std::string_view kDefaultTemplate =
    R"([Default template; not the canonical wording of any published study.]

You are rating how generative AI interacts with one occupational task.

Task statement: "{{statement}}"

Evaluate the task on three criteria:
1. Augmentation potential (0-100): how much generative AI, used as a complementary tool, raises the productivity of a human performing this task.
2. Substitution risk (0-100): how far AI could perform this task entirely without the human.
3. Augmentation type: exactly one of information synthesis, creative amplification, communication enhancement, decision support, quality assurance, none, or pure substitution.

Reply with only a JSON object of the form
{"augmentation": <number 0-100>, "substitution": <number 0-100>, "aug_type": "<one of information_synthesis, creative_amplification, communication_enhancement, decision_support, quality_assurance, none, pure_substitution>"}
)";

std::string render_prompt(std::string_view statement, std::string_view tmpl) {
  if (text::trim(statement).empty()) throw ValidationError("render_prompt: task statement is empty");
  const auto pos = tmpl.find(kStatementPlaceholder);
  if (pos == std::string_view::npos)
    throw ValidationError("prompt template lacks the {{statement}} placeholder");

  // JSON string escaping, minus the surrounding quotes.
  std::string escaped = nlohmann::json(std::string(statement)).dump();
  escaped = escaped.substr(1, escaped.size() - 2);

  std::string out;
  out.reserve(tmpl.size() + escaped.size());
  out.append(tmpl.substr(0, pos));
  out.append(escaped);
  out.append(tmpl.substr(pos + kStatementPlaceholder.size()));
  return out;
}

ScoreRequest make_request(std::string task_id, std::string statement, std::string_view tmpl) {
  ScoreRequest r;
  r.prompt_text = render_prompt(statement, tmpl);
  r.task_id = std::move(task_id);
  r.statement = std::move(statement);
  return r;
}

std::string to_response_json(const ScoreFragment& f) {
  nlohmann::ordered_json j;
  j["augmentation"] = f.augmentation;
  j["substitution"] = f.substitution;
  j["aug_type"] = std::string(to_string(f.aug_type));
  return j.dump();
}

ResponseError::ResponseError(ResponseErrorKind kind, std::string message, std::string raw)
    : ValidationError(message + " in response: " + raw), kind_(kind), raw_(std::move(raw)) {}

namespace {

// Returns the end (one past '}') of the balanced object starting at `start`,
// honoring string literals; npos if unbalanced.
std::size_t match_object(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<nlohmann::json> first_object(std::string_view raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const std::size_t end = match_object(raw, pos);
    if (end == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(raw.substr(pos, end - pos), nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

double score_field(const nlohmann::json& obj, const char* key, std::string_view raw) {
  if (!obj.contains(key)) throw ResponseError(ResponseErrorKind::kParse, std::string("missing key '") + key + "'", std::string(raw));
  const auto& v = obj.at(key);
  std::optional<double> value;
  if (v.is_number()) value = v.get<double>();
  else if (v.is_string()) value = text::parse_double(v.get<std::string>());
  if (!value || !std::isfinite(*value))
    throw ResponseError(ResponseErrorKind::kParse, std::string("'") + key + "' is not a number", std::string(raw));
  if (*value < 0.0 || *value > 100.0)
    throw ResponseError(ResponseErrorKind::kRange, std::string("'") + key + "' outside [0,100]", std::string(raw));
  return *value;
}

}  // namespace

ScoreFragment parse_response(std::string_view raw) {
  const auto obj = first_object(raw);
  if (!obj) throw ResponseError(ResponseErrorKind::kParse, "no JSON object", std::string(raw));

  ScoreFragment f;
  f.augmentation = score_field(*obj, "augmentation", raw);
  f.substitution = score_field(*obj, "substitution", raw);
  if (!obj->contains("aug_type") || !obj->at("aug_type").is_string())
    throw ResponseError(ResponseErrorKind::kParse, "missing string 'aug_type'", std::string(raw));
  const auto t = parse_aug_type(obj->at("aug_type").get<std::string>());
  if (!t) throw ResponseError(ResponseErrorKind::kEnum, "unknown aug_type", std::string(raw));
  f.aug_type = *t;
  return f;
}

// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::uint64_t seed, MockConfig config) : seed_(seed), config_(config) {}

std::string MockBackend::name() const { return "mock-" + std::to_string(seed_); }

ScoreFragment MockBackend::fragment_for(std::string_view task_id) const {
  const std::string base = std::to_string(seed_) + '\x1f' + std::string(task_id);
  auto uniform = [&](const char* salt) {
    const std::uint64_t h = hash64(base + '\x1f' + salt);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;  // open interval (0,1)
  };
  const boost::math::normal_distribution<double> std_normal;
  auto draw = [&](const char* salt, double mean, double sd) {
    const double v = mean + sd * boost::math::quantile(std_normal, uniform(salt));
    return std::clamp(std::round(v * 10.0) / 10.0, 0.0, 100.0);
  };
  ScoreFragment f;
  f.augmentation = draw("augmentation", config_.aug_mean, config_.aug_sd);
  f.substitution = draw("substitution", config_.sub_mean, config_.sub_sd);
  f.aug_type = kAllAugTypes[hash64(base + "\x1f" "aug_type") % kAllAugTypes.size()];
  return f;
}

std::string MockBackend::score(const ScoreRequest& request) { return to_response_json(fragment_for(request.task_id)); }

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw IoError("cannot read score cache " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("response"))
      throw IoError("score cache " + path_.string() + " line " + std::to_string(lineno) + " is corrupt");
    entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
  }
}

std::string ResponseCache::key(std::string_view backend_name, std::string_view prompt_text) {
  std::string material(backend_name);
  material.push_back('\0');
  material.append(prompt_text);
  return sha256_hex(material);
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& key, const std::string& backend_name, const std::string& response) {
  std::lock_guard lock(mutex_);
  if (entries_.count(key)) return;
  std::ofstream out(path_, std::ios::app);
  nlohmann::ordered_json j;
  j["key"] = key;
  j["backend"] = backend_name;
  j["response"] = response;
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot append to score cache " + path_.string());
  entries_.emplace(key, response);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

BatchResult score_batch(const std::vector<ScoreRequest>& requests, ScorerBackend& backend, ResponseCache* cache,
                        const BatchOptions& options) {
  if (options.parallelism < 1) throw ValidationError("score_batch: parallelism must be >= 1");
  if (options.max_attempts < 1) throw ValidationError("score_batch: max_attempts must be >= 1");
  if (!backend.deterministic() && cache == nullptr)
    throw ValidationError("backend '" + backend.name() + "' is nondeterministic; a response cache is required");

  const std::string backend_name = backend.name();
  BatchResult result;
  result.scores.resize(requests.size());
  std::vector<std::optional<TaskFailure>> failures(requests.size());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> hits{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  auto work = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= requests.size()) return;
      const ScoreRequest& req = requests[i];
      try {
        const std::string key = ResponseCache::key(backend_name, req.prompt_text);
        if (cache) {
          if (auto raw = cache->lookup(key)) {
            ++hits;
            result.scores[i] = parse_response(*raw);
            continue;
          }
        }
        std::string last_error;
        int attempt = 0;
        for (attempt = 1; attempt <= options.max_attempts; ++attempt) {
          try {
            ++calls;
            std::string raw = backend.score(req);
            ScoreFragment frag = parse_response(raw);
            if (cache) cache->store(key, backend_name, raw);
            result.scores[i] = frag;
            break;
          } catch (const TransportError& e) {
            last_error = e.what();
          } catch (const ResponseError& e) {
            last_error = e.what();
          }
          if (attempt < options.max_attempts) sleep(options.initial_backoff * (1 << (attempt - 1)));
        }
        if (!result.scores[i]) failures[i] = TaskFailure{i, req.task_id, options.max_attempts, last_error};
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const std::size_t n_threads = std::min(options.parallelism, std::max<std::size_t>(requests.size(), 1));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  for (auto& f : failures) {
    if (f) result.failures.push_back(std::move(*f));
  }
  result.backend_calls = calls;
  result.cache_hits = hits;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<TaskInput> read_task_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  const auto id = header.find("task_id");
  const auto occ = header.find("occupation_code");
  const auto stmt = header.find("statement");
  const auto imp = header.find("importance");
  if (!id || !occ || !stmt) throw ValidationError("task CSV needs task_id, occupation_code, statement columns");

  std::vector<TaskInput> out;
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    const auto line = std::to_string(reader.record_line());
    if (row.size() != header.size()) throw ValidationError("task CSV line " + line + ": wrong field count");
    TaskInput t{std::string(text::trim(row[*id])), std::string(text::trim(row[*occ])), row[*stmt], 1.0};
    if (imp && !text::trim(row[*imp]).empty()) {
      const auto w = text::parse_double(row[*imp]);
      if (!w || *w < 0.0) throw ValidationError("task CSV line " + line + ": importance must be >= 0");
      t.importance = *w;
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_score_csv(std::ostream& out, const std::vector<TaskScore>& scores) {
  csv::write_row(out, {"task_id", "occupation_code", "augmentation", "substitution", "aug_type", "importance"});
  for (const auto& s : scores) {
    csv::write_row(out, {s.task_id, s.occupation_code, text::format_double(s.augmentation),
                         text::format_double(s.substitution), std::string(to_string(s.aug_type)),
                         text::format_double(s.importance)});
  }
}

std::vector<TaskScore> read_score_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  std::vector<std::size_t> idx;
  for (const char* name : {"task_id", "occupation_code", "augmentation", "substitution", "aug_type", "importance"}) {
    const auto i = header.find(name);
    if (!i) throw ValidationError(std::string("score CSV is missing column ") + name);
    idx.push_back(*i);
  }
  std::vector<TaskScore> out;
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    const auto line = std::to_string(reader.record_line());
    if (row.size() != header.size()) throw ValidationError("score CSV line " + line + ": wrong field count");
    TaskScore s;
    s.task_id = std::string(text::trim(row[idx[0]]));
    s.occupation_code = std::string(text::trim(row[idx[1]]));
    const auto a = text::parse_double(row[idx[2]]);
    const auto sub = text::parse_double(row[idx[3]]);
    const auto t = parse_aug_type(row[idx[4]]);
    const auto w = text::parse_double(row[idx[5]]);
    if (!a || !sub || !t || !w) throw ValidationError("score CSV line " + line + ": unparseable field");
    s.augmentation = *a;
    s.substitution = *sub;
    s.aug_type = *t;
    s.importance = *w;
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("score CSV line " + line + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace augmincer::scoring
