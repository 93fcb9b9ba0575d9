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

#include "cnp/prediction_source.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include "cnp/digest.h"
#include "cnp/error.h"
#include "cnp/logging.h"
#include "cnp/parallel.h"
#include "httplib.h"
#include "json.hpp"

namespace cnp {
namespace {

namespace fs = std::filesystem;

class HttplibTransport : public Transport {
 public:
  HttplibTransport(std::string host_port, std::string prefix)
      : host_port_(std::move(host_port)), prefix_(std::move(prefix)) {}

  HttpResponse Get(const std::string& path) override {
    auto client = NewClient();
    return Convert(client.Get(prefix_ + path));
  }

  HttpResponse Post(const std::string& path, const std::string& json_body) override {
    auto client = NewClient();
    return Convert(client.Post(prefix_ + path, json_body, "application/json"));
  }

 private:
  // One client per request keeps concurrent batches independent.
  httplib::Client NewClient() const {
    httplib::Client client(host_port_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    client.set_write_timeout(30, 0);
    return client;
  }

  static HttpResponse Convert(const httplib::Result& result) {
    if (!result) return HttpResponse{0, httplib::to_string(result.error())};
    return HttpResponse{result->status, result->body};
  }

  std::string host_port_;
  std::string prefix_;
};

PredictionStore StoreFromFile(const PredictionFile& file, const LabelScheme& scheme,
                              std::span<const NLIExample> examples, const std::string& where) {
  std::map<std::string, const PredictionFileRow*> rows;
  for (const auto& row : file.rows) rows.emplace(row.example_id, &row);
  PredictionStore store;
  store.model_id = file.model_id;
  store.scheme = scheme;
  for (const auto& ex : examples) {
    auto it = rows.find(ex.example_id);
    if (it == rows.end()) {
      throw Error(ErrorCode::kMissingPrediction,
                  where + " has no prediction for example " + ex.example_id);
    }
    store.records.emplace(ex.example_id,
                          MakePrediction(scheme, ex.example_id, it->second->label, it->second->probs));
  }
  return store;
}

}  // namespace

std::unique_ptr<Transport> MakeHttpTransport(const std::string& base_url) {
  const std::string scheme_sep = "://";
  const std::size_t sep = base_url.find(scheme_sep);
  if (sep == std::string::npos || base_url.substr(0, sep) != "http") {
    throw Error(ErrorCode::kInvalidArgument, "service URL must start with http:// : " + base_url);
  }
  const std::size_t host_start = sep + scheme_sep.size();
  const std::size_t slash = base_url.find('/', host_start);
  std::string host_port = base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (host_port.size() <= host_start) {
    throw Error(ErrorCode::kInvalidArgument, "service URL has no host: " + base_url);
  }
  return std::make_unique<HttplibTransport>(std::move(host_port), std::move(prefix));
}

std::string InputDigest(const NLIExample& example) {
  return Sha256Hex(example.premise + "\x1f" + example.hypothesis).substr(0, 16);
}

std::string CacheSlug(std::string_view text) {
  std::string_view t = text;
  if (auto sep = t.find("://"); sep != std::string_view::npos) t = t.substr(sep + 3);
  std::string out;
  for (char c : t) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (ok) {
      out.push_back(c);
    } else if (out.empty() || out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && (out.back() == '_' || out.back() == '.')) out.pop_back();
  while (!out.empty() && out.front() == '.') out.erase(out.begin());
  return out.empty() ? "model" : out;
}

PredictionStore FilePredictionSource::Fetch(std::span<const NLIExample> examples) {
  const PredictionFile file = ReadPredictionFile(path_);
  const LabelScheme scheme = ResolveScheme(scheme_spec_, file.labels);
  return StoreFromFile(file, scheme, examples, path_.string());
}

PredictionStore SyntheticPredictionSource::Fetch(std::span<const NLIExample> examples) {
  PredictionStore store;
  store.model_id = SyntheticModelId(model_);
  store.scheme = SyntheticScheme();
  for (const auto& ex : examples) store.records.emplace(ex.example_id, Predict(model_, ex));
  return store;
}

ServicePredictionSource::ServicePredictionSource(ServiceOptions options,
                                                 std::unique_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  if (options_.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
}

fs::path ServicePredictionSource::CachePath() const {
  return options_.cache_dir / (CacheSlug(options_.cache_key.value_or(options_.url)) + ".jsonl");
}

HttpResponse ServicePredictionSource::WithRetries(
    const std::string& what, const std::function<HttpResponse()>& call) const {
  HttpResponse last;
  auto backoff = options_.initial_backoff;
  for (std::size_t attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    last = call();
    if (last.status == 200) return last;
    const bool transient = last.status == 0 || last.status == 503;
    if (!transient) break;
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorCode::kServiceUnavailable,
              what + " failed against " + options_.url + " (status " +
                  std::to_string(last.status) + "): " + last.body.substr(0, 200));
}

PredictionStore ServicePredictionSource::Fetch(std::span<const NLIExample> examples) {
  const fs::path cache_path = CachePath();
  std::optional<PredictionFile> cache;
  if (fs::exists(cache_path)) {
    try {
      cache = ReadPredictionFile(cache_path);
    } catch (const Error& e) {
      LogWarning("ignoring unreadable prediction cache " + cache_path.string() + ": " + e.what());
    }
  }
  std::map<std::string, PredictionFileRow> cached;
  if (cache) {
    for (auto& row : cache->rows) cached.emplace(row.example_id, row);
  }
  auto hit = [&](const NLIExample& ex) {
    auto it = cached.find(ex.example_id);
    return it != cached.end() && it->second.input_digest == InputDigest(ex);
  };

  std::vector<const NLIExample*> missing;
  for (const auto& ex : examples) {
    if (!hit(ex)) missing.push_back(&ex);
  }

  std::string model_id;
  std::vector<std::string> labels;
  if (missing.empty() && cache) {
    model_id = cache->model_id;
    labels = cache->labels;
  } else {
    const HttpResponse resp = WithRetries("GET /v1/labels", [&] { return transport_->Get("/v1/labels"); });
    try {
      const auto j = nlohmann::json::parse(resp.body);
      model_id = j.at("model_id").get<std::string>();
      labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "bad /v1/labels response: " + std::string(e.what()));
    }
    if (cache && (cache->model_id != model_id || cache->labels != labels)) {
      LogWarning("prediction cache " + cache_path.string() +
                 " belongs to a different model or label set; refetching");
      cached.clear();
      missing.clear();
      for (const auto& ex : examples) missing.push_back(&ex);
    }
  }
  const LabelScheme scheme = ResolveScheme(options_.scheme_spec, labels);

  if (!missing.empty()) {
    const std::size_t n_batches = (missing.size() + options_.batch_size - 1) / options_.batch_size;
    std::vector<std::vector<PredictionFileRow>> batch_rows(n_batches);
    ParallelFor(
        n_batches,
        [&](std::size_t b) {
          const std::size_t begin = b * options_.batch_size;
          const std::size_t end = std::min(missing.size(), begin + options_.batch_size);
          nlohmann::json request;
          request["pairs"] = nlohmann::json::array();
          for (std::size_t i = begin; i < end; ++i) {
            request["pairs"].push_back(
                {{"premise", missing[i]->premise}, {"hypothesis", missing[i]->hypothesis}});
          }
          const std::string body = request.dump();
          const HttpResponse resp = WithRetries(
              "POST /v1/predict", [&] { return transport_->Post("/v1/predict", body); });
          nlohmann::json preds;
          try {
            preds = nlohmann::json::parse(resp.body).at("predictions");
          } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kParseError, "bad /v1/predict response: " + std::string(e.what()));
          }
          if (!preds.is_array() || preds.size() != end - begin) {
            throw Error(ErrorCode::kParseError,
                        "/v1/predict returned " + std::to_string(preds.size()) +
                            " predictions for " + std::to_string(end - begin) + " pairs");
          }
          for (std::size_t i = begin; i < end; ++i) {
            const auto& p = preds[i - begin];
            PredictionFileRow row;
            row.example_id = missing[i]->example_id;
            try {
              row.label = p.at("label").get<std::string>();
              if (auto probs = p.find("probs"); probs != p.end() && !probs->is_null()) {
                row.probs = probs->get<LabelProbs>();
              }
            } catch (const nlohmann::json::exception& e) {
              throw Error(ErrorCode::kParseError, "bad prediction entry: " + std::string(e.what()));
            }
            row.input_digest = InputDigest(*missing[i]);
            Collapse(scheme, row.label, row.probs);  // validates before caching
            batch_rows[b].push_back(std::move(row));
          }
        },
        options_.max_in_flight);
    for (auto& rows : batch_rows) {
      for (auto& row : rows) cached[row.example_id] = std::move(row);
    }
    PredictionFile updated;
    updated.model_id = model_id;
    updated.labels = labels;
    for (auto& [id, row] : cached) updated.rows.push_back(row);
    WritePredictionFile(updated, cache_path);
  }

  PredictionStore store;
  store.model_id = model_id;
  store.scheme = scheme;
  for (const auto& ex : examples) {
    const PredictionFileRow& row = cached.at(ex.example_id);
    store.records.emplace(ex.example_id, MakePrediction(scheme, ex.example_id, row.label, row.probs));
  }
  return store;
}

std::unique_ptr<PredictionSource> MakeSource(std::string_view spec, const SourceDefaults& defaults) {
  auto starts = [&](std::string_view prefix) { return spec.substr(0, prefix.size()) == prefix; };
  if (starts("file:")) {
    return std::make_unique<FilePredictionSource>(std::string(spec.substr(5)), defaults.scheme_spec);
  }
  if (starts("synthetic:")) {
    auto model = ParseSyntheticModel(spec.substr(10));
    if (!model) {
      throw Error(ErrorCode::kInvalidArgument, "unknown synthetic model \"" +
                                                   std::string(spec.substr(10)) + "\"");
    }
    return std::make_unique<SyntheticPredictionSource>(*model);
  }
  std::string url;
  if (starts("service:")) {
    url = std::string(spec.substr(8));
  } else if (starts("http://")) {
    url = std::string(spec);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "prediction source must be file:<path>, synthetic:<name> or service:<url>, got \"" +
                    std::string(spec) + "\"");
  }
  ServiceOptions options;
  options.url = url;
  options.scheme_spec = defaults.scheme_spec;
  options.cache_dir = defaults.cache_dir;
  options.batch_size = defaults.batch_size;
  options.max_in_flight = defaults.max_in_flight;
  auto transport = MakeHttpTransport(url);
  return std::make_unique<ServicePredictionSource>(std::move(options), std::move(transport));
}

PredictionStore FetchPredictions(PredictionSource& source, std::span<const NLIExample> examples) {
  PredictionStore store = source.Fetch(examples);
  if (store.records.size() != examples.size()) {
    // Duplicate example ids in the request would collapse here.
    for (const auto& ex : examples) store.At(ex.example_id);
  }
  return store;
}

}  // namespace cnp
