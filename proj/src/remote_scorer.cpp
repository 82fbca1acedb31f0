#include <httplib.h>

#include <json.hpp>

#include "convodyn/sentiment.hpp"

namespace convodyn {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& endpoint, int timeout_seconds) {
  httplib::Client client(endpoint);
  if (!client.is_valid()) throw TransportError("invalid scorer endpoint '" + endpoint + "'");
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  return client;
}

}  // namespace

RemoteScorer::RemoteScorer(Options options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw TransportError("remote scorer needs an endpoint");
  if (options_.batch_size == 0) throw ValidationError("remote scorer batch size must be positive");
  while (!options_.endpoint.empty() && options_.endpoint.back() == '/') options_.endpoint.pop_back();
  host_ = options_.endpoint;
}

bool RemoteScorer::healthy() const {
  auto client = make_client(host_, options_.timeout_seconds);
  auto res = client.Get("/health");
  if (!res || res->status != 200) return false;
  try {
    return json::parse(res->body).value("status", "") == "ok";
  } catch (const json::exception&) {
    return false;
  }
}

std::vector<StarDistribution> RemoteScorer::score(std::span<const ScoreRequest> requests) const {
  std::vector<StarDistribution> out;
  out.reserve(requests.size());
  auto client = make_client(host_, options_.timeout_seconds);
  for (std::size_t start = 0; start < requests.size(); start += options_.batch_size) {
    const std::size_t end = std::min(requests.size(), start + options_.batch_size);
    json body;
    body["texts"] = json::array();
    for (std::size_t i = start; i < end; ++i) body["texts"].push_back(std::string(requests[i].text));

    auto res = client.Post("/score", body.dump(), "application/json");
    if (!res) {
      throw TransportError("scorer request to " + host_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("scorer at " + host_ + " answered HTTP " + std::to_string(res->status));
    }
    try {
      const json reply = json::parse(res->body);
      const auto& results = reply.at("results");
      if (!results.is_array() || results.size() != end - start) {
        throw TransportError("scorer returned " + std::to_string(results.size()) + " results for " +
                             std::to_string(end - start) + " texts");
      }
      for (const auto& r : results) {
        const auto& probs = r.at("probs");
        if (!probs.is_array() || probs.size() != kNumStars) throw TransportError("scorer result needs 5 probs");
        StarDistribution dist;
        for (int s = 0; s < kNumStars; ++s) dist.probs[s] = probs[s].get<double>();
        try {
          dist.validate();
        } catch (const ValidationError& e) {
          throw TransportError(std::string("scorer returned an invalid distribution: ") + e.what());
        }
        out.push_back(dist);
      }
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed scorer reply: ") + e.what());
    }
  }
  return out;
}

}  // namespace convodyn
