// Copyright 2026 The CNP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CNP_PREDICTION_SOURCE_H_
#define CNP_PREDICTION_SOURCE_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cnp/natural_logic.h"
#include "cnp/prediction.h"
#include "cnp/synthetic_models.h"

namespace cnp {

class PredictionSource {
 public:
  virtual ~PredictionSource() = default;

  // Exactly one prediction per requested example.
  virtual PredictionStore Fetch(std::span<const NLIExample> examples) = 0;

  // Human-readable source description, e.g. "file:/tmp/preds.jsonl".
  virtual std::string Describe() const = 0;
};

// Precomputed prediction file. Missing ids raise kMissingPrediction.
class FilePredictionSource : public PredictionSource {
 public:
  FilePredictionSource(std::filesystem::path path, std::string scheme_spec)
      : path_(std::move(path)), scheme_spec_(std::move(scheme_spec)) {}

  PredictionStore Fetch(std::span<const NLIExample> examples) override;
  std::string Describe() const override { return "file:" + path_.string(); }

 private:
  std::filesystem::path path_;
  std::string scheme_spec_;
};

class SyntheticPredictionSource : public PredictionSource {
 public:
  explicit SyntheticPredictionSource(SyntheticModel model) : model_(model) {}

  PredictionStore Fetch(std::span<const NLIExample> examples) override;
  std::string Describe() const override {
    return "synthetic:" + SyntheticModelId(model_);
  }

 private:
  SyntheticModel model_;
};

struct HttpResponse {
  int status = 0;  // 0 when no response was received
  std::string body;
};

// Minimal HTTP surface the service source needs; swapped out in tests.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse Get(const std::string& path) = 0;
  virtual HttpResponse Post(const std::string& path, const std::string& json_body) = 0;
};

// cpp-httplib client for "http://host:port[/prefix]".
std::unique_ptr<Transport> MakeHttpTransport(const std::string& base_url);

struct ServiceOptions {
  std::string url;
  std::string scheme_spec;                 // "" or "auto" to infer from /v1/labels
  std::optional<std::string> cache_key;    // overrides the URL-derived cache name
  std::filesystem::path cache_dir;
  std::size_t batch_size = 32;
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t max_in_flight = 4;
};

// Talks to GET /v1/labels and POST /v1/predict. Results are cached in
// <cache_dir>/<cache name>.jsonl keyed by (model_id, example_id, digest of
// premise and hypothesis); a fully warm cache is served without any request.
class ServicePredictionSource : public PredictionSource {
 public:
  ServicePredictionSource(ServiceOptions options, std::unique_ptr<Transport> transport);

  PredictionStore Fetch(std::span<const NLIExample> examples) override;
  std::string Describe() const override { return "service:" + options_.url; }

  std::filesystem::path CachePath() const;

 private:
  HttpResponse WithRetries(const std::string& what,
                           const std::function<HttpResponse()>& call) const;

  ServiceOptions options_;
  std::unique_ptr<Transport> transport_;
};

// Digest of the example text used in cache keys.
std::string InputDigest(const NLIExample& example);

// Filesystem-safe name derived from a model id or URL.
std::string CacheSlug(std::string_view text);

struct SourceDefaults {
  std::string scheme_spec;
  std::filesystem::path cache_dir;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

// "file:<path>", "synthetic:<name>[:seed]", "service:<url>" or a bare
// http:// URL. Throws kInvalidArgument for anything else.
std::unique_ptr<PredictionSource> MakeSource(std::string_view spec,
                                             const SourceDefaults& defaults);

PredictionStore FetchPredictions(PredictionSource& source,
                                 std::span<const NLIExample> examples);

}  // namespace cnp

#endif  // CNP_PREDICTION_SOURCE_H_
