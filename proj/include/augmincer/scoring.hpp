// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augmincer/domain.hpp"
#include "augmincer/errors.hpp"

namespace augmincer::scoring {

/// Non-canonical default prompt. `{{statement}}` is replaced by the task
/// statement, JSON-string-escaped.
extern const std::string_view kDefaultTemplate;
inline constexpr std::string_view kStatementPlaceholder = "{{statement}}";

/// Throws ValidationError on an empty (after trimming) statement or a
/// template lacking the placeholder.
std::string render_prompt(std::string_view statement, std::string_view tmpl = kDefaultTemplate);

struct ScoreRequest {
  std::string task_id;
  std::string statement;
  std::string prompt_text;
};

ScoreRequest make_request(std::string task_id, std::string statement, std::string_view tmpl = kDefaultTemplate);

struct ScoreFragment {
  double augmentation = 0.0;
  double substitution = 0.0;
  AugType aug_type = AugType::kNone;

  bool operator==(const ScoreFragment&) const = default;
};

/// Serializes a fragment as the JSON object a scorer is asked to return.
std::string to_response_json(const ScoreFragment& f);

enum class ResponseErrorKind { kParse, kRange, kEnum };

class ResponseError : public ValidationError {
 public:
  ResponseError(ResponseErrorKind kind, std::string message, std::string raw);
  ResponseErrorKind kind() const { return kind_; }
  const std::string& raw() const { return raw_; }

 private:
  ResponseErrorKind kind_;
  std::string raw_;
};

/// Extracts the first parseable JSON object embedded in `raw` and validates
/// augmentation/substitution in [0,100] and the aug_type enumeration.
ScoreFragment parse_response(std::string_view raw);

/// Raised by backends for transport failures; score_batch retries these.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual std::string name() const = 0;
  /// False for live models; score_batch then refuses to run without a cache.
  virtual bool deterministic() const = 0;
  /// Raw response text for one request. May throw TransportError.
  virtual std::string score(const ScoreRequest& request) = 0;
};

struct MockConfig {
  double aug_mean = 48.8;
  double aug_sd = 12.1;
  double sub_mean = 39.7;
  double sub_sd = 14.3;
};

/// Deterministic stand-in for a live model: scores are a hash of
/// (seed, task_id) pushed through a normal quantile, clamped to [0,100];
/// aug_type is the hash modulo 7.
class MockBackend final : public ScorerBackend {
 public:
  explicit MockBackend(std::uint64_t seed, MockConfig config = {});
  std::string name() const override;
  bool deterministic() const override { return true; }
  std::string score(const ScoreRequest& request) override;

  ScoreFragment fragment_for(std::string_view task_id) const;

 private:
  std::uint64_t seed_;
  MockConfig config_;
};

struct HttpConfig {
  std::string endpoint;                 // e.g. http://localhost:8080/v1/score
  std::string model;                    // sent as "model"
  std::string auth_env;                 // name of the env var holding the key
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string response_pointer = "/text";  // JSON pointer to the answer text
  int timeout_seconds = 60;
};

/// Generic JSON-over-HTTP POST backend: sends {"model", "prompt", "task_id"}
/// and reads the text at `response_pointer` of the reply.
class HttpBackend final : public ScorerBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  std::string name() const override;
  bool deterministic() const override { return false; }
  std::string score(const ScoreRequest& request) override;

 private:
  HttpConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Append-only JSON-lines response cache keyed by
/// sha256(backend name, prompt). Writes are serialized.
class ResponseCache {
 public:
  /// Loads existing entries; creates the file on first write. Throws IoError.
  explicit ResponseCache(std::filesystem::path path);

  static std::string key(std::string_view backend_name, std::string_view prompt_text);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& backend_name, const std::string& response);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
};

struct BatchOptions {
  std::size_t parallelism = 1;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  /// Injected so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct TaskFailure {
  std::size_t index = 0;
  std::string task_id;
  int attempts = 0;
  std::string message;
};

struct BatchResult {
  std::vector<std::optional<ScoreFragment>> scores;  // aligned with the input
  std::vector<TaskFailure> failures;                 // sorted by index
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
};

/// Scores every request, consulting and filling `cache` (which may be null
/// only for deterministic backends). Output order equals input order for any
/// parallelism. Cache I/O failures propagate as IoError.
BatchResult score_batch(const std::vector<ScoreRequest>& requests, ScorerBackend& backend, ResponseCache* cache,
                        const BatchOptions& options);

/// Input task file: task_id,occupation_code,statement,importance.
struct TaskInput {
  std::string task_id;
  std::string occupation_code;
  std::string statement;
  double importance = 1.0;
};
std::vector<TaskInput> read_task_csv(std::istream& in);

/// Score file: task_id,occupation_code,augmentation,substitution,aug_type,importance.
void write_score_csv(std::ostream& out, const std::vector<TaskScore>& scores);
std::vector<TaskScore> read_score_csv(std::istream& in);

}  // namespace augmincer::scoring
