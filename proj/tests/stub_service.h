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

// In-process stand-in for the inference service: a fixed prediction table
// reachable through a fake Transport or a real HTTP listener.

#ifndef CNP_TESTS_STUB_SERVICE_H_
#define CNP_TESTS_STUB_SERVICE_H_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cnp/corpus_io.h"
#include "cnp/digest.h"
#include "cnp/prediction.h"
#include "cnp/prediction_source.h"
#include "httplib.h"
#include "json.hpp"

namespace cnp::testing {

struct StubRow {
  std::string label;
  LabelProbs probs;
};

class StubService {
 public:
  // Three-class table over `examples`; labels and probabilities derive from
  // a hash of the text so that they are arbitrary but fixed.
  explicit StubService(const std::vector<NLIExample>& examples, std::string model_id = "stub-nli")
      : model_id_(std::move(model_id)), labels_{"contradiction", "neutral", "entailment"} {
    for (const auto& e : examples) table_[Key(e.premise, e.hypothesis)] = RowFor(e);
  }

  static std::string Key(const std::string& p, const std::string& h) { return p + "\x1f" + h; }

  StubRow RowFor(const NLIExample& e) const {
    const std::string h = Sha256Hex(model_id_ + "|" + e.premise + "|" + e.hypothesis);
    const double a = 1 + std::stoi(h.substr(0, 2), nullptr, 16);
    const double b = 1 + std::stoi(h.substr(2, 2), nullptr, 16);
    const double c = 1 + std::stoi(h.substr(4, 2), nullptr, 16);
    const double total = a + b + c;
    LabelProbs probs{{"contradiction", a / total}, {"neutral", b / total}, {"entailment", 1.0 - a / total - b / total}};
    std::string best = "contradiction";
    for (const auto& [l, p] : probs) {
      if (p > probs[best]) best = l;
    }
    return StubRow{best, probs};
  }

  HttpResponse Handle(const std::string& method, const std::string& path, const std::string& body) {
    if (failures_left_ > 0) {
      --failures_left_;
      return HttpResponse{503, "busy"};
    }
    if (method == "GET" && path == "/v1/labels") {
      ++label_calls_;
      nlohmann::json j{{"model_id", model_id_}, {"labels", labels_}};
      return HttpResponse{200, j.dump()};
    }
    if (method == "POST" && path == "/v1/predict") {
      ++predict_calls_;
      nlohmann::json req;
      try {
        req = nlohmann::json::parse(body);
      } catch (const std::exception&) {
        return HttpResponse{400, "bad json"};
      }
      nlohmann::ordered_json preds = nlohmann::ordered_json::array();
      for (const auto& pair : req.at("pairs")) {
        const std::string key = Key(pair.at("premise"), pair.at("hypothesis"));
        std::lock_guard<std::mutex> lock(mu_);
        auto it = table_.find(key);
        if (it == table_.end()) return HttpResponse{400, "unknown pair"};
        pairs_served_ += 1;
        nlohmann::ordered_json probs;
        for (const auto& l : labels_) probs[l] = it->second.probs.at(l);
        preds.push_back({{"label", it->second.label}, {"probs", probs}});
      }
      return HttpResponse{200, nlohmann::ordered_json{{"predictions", preds}}.dump()};
    }
    return HttpResponse{404, "not found"};
  }

  // Rows in the prediction-file format, keyed by example id.
  PredictionFile Dump(const std::vector<NLIExample>& examples) const {
    PredictionFile f;
    f.model_id = model_id_;
    f.labels = labels_;
    for (const auto& e : examples) {
      const StubRow& r = table_.at(Key(e.premise, e.hypothesis));
      f.rows.push_back({e.example_id, r.label, r.probs, std::nullopt});
    }
    return f;
  }

  void AddExample(const NLIExample& e) { table_[Key(e.premise, e.hypothesis)] = RowFor(e); }
  void FailNext(int n) { failures_left_ = n; }

  std::string model_id_;
  std::vector<std::string> labels_;
  std::atomic<int> label_calls_{0};
  std::atomic<int> predict_calls_{0};
  std::atomic<int> pairs_served_{0};

 private:
  std::map<std::string, StubRow> table_;
  std::atomic<int> failures_left_{0};
  std::mutex mu_;
};

class FakeTransport : public Transport {
 public:
  explicit FakeTransport(StubService* stub) : stub_(stub) {}
  HttpResponse Get(const std::string& path) override { return stub_->Handle("GET", path, ""); }
  HttpResponse Post(const std::string& path, const std::string& body) override {
    return stub_->Handle("POST", path, body);
  }

 private:
  StubService* stub_;
};

// Serves a StubService over HTTP on 127.0.0.1 with an ephemeral port.
class HttpStub {
 public:
  explicit HttpStub(StubService* stub) : stub_(stub) {
    auto reply = [](const HttpResponse& r, httplib::Response& res) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server_.Get("/v1/labels", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(stub_->Handle("GET", "/v1/labels", ""), res);
    });
    server_.Post("/v1/predict", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(stub_->Handle("POST", "/v1/predict", req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpStub() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  StubService* stub_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace cnp::testing

#endif  // CNP_TESTS_STUB_SERVICE_H_
