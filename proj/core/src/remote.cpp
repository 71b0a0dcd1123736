// SPDX-License-Identifier: Apache-2.0

#include "eager/remote.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eager/errors.hpp"

namespace eager {

using nlohmann::json;

namespace {

std::string token_ids_csv(std::span<const TokenId> context) {
  std::ostringstream out;
  for (size_t i = 0; i < context.size(); ++i) {
    if (i) out << ',';
    out << context[i];
  }
  return out.str();
}

// Replaces "${name}" placeholders. Placeholders may stand alone inside a
// JSON string value ("temperature":"${temperature}"), in which case the
// quotes are dropped for non-string substitutions.
std::string expand_template(std::string tpl, const std::string& name,
                            const std::string& value, bool quoted) {
  const std::string hole = "${" + name + "}";
  const std::string quoted_hole = "\"" + hole + "\"";
  size_t pos;
  if (!quoted) {
    while ((pos = tpl.find(quoted_hole)) != std::string::npos) {
      tpl.replace(pos, quoted_hole.size(), value);
    }
  }
  while ((pos = tpl.find(hole)) != std::string::npos) {
    tpl.replace(pos, hole.size(), value);
  }
  return tpl;
}

const json* walk_path(const json& doc, const std::string& dot_path) {
  const json* cur = &doc;
  std::istringstream parts(dot_path);
  std::string key;
  while (std::getline(parts, key, '.')) {
    if (cur->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (...) {
        return nullptr;
      }
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else if (cur->is_object()) {
      auto it = cur->find(key);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else {
      return nullptr;
    }
  }
  return cur;
}

TokenDistribution parse_response(const RemoteEndpoint& ep,
                                 const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("remote response is not JSON: ") + e.what());
  }
  const json* lp = walk_path(doc, ep.response_logprobs_path);
  if (lp == nullptr || !lp->is_object()) {
    throw ParseError("remote response missing logprobs at path '" +
                     ep.response_logprobs_path + "'");
  }
  std::vector<TokenEntry> entries;
  entries.reserve(lp->size());
  double total = 0.0;
  for (auto it = lp->begin(); it != lp->end(); ++it) {
    TokenId token;
    try {
      token = static_cast<TokenId>(std::stol(it.key()));
    } catch (...) {
      throw ParseError("remote logprob key is not a token id: " + it.key());
    }
    const double p = std::exp(it.value().get<double>());
    entries.push_back({token, p});
    total += p;
  }
  if (entries.size() < 2) {
    throw InsufficientLogprobsError(
        "remote endpoint returned fewer than 2 logprobs");
  }
  // Servers may report logprobs whose exps overshoot unit mass (rounding,
  // or values taken before truncation); scale the excess away so a valid
  // truncated distribution always comes back.
  if (total > 1.0) {
    for (TokenEntry& e : entries) e.prob /= total;
  }
  return TokenDistribution(std::move(entries), ep.vocab_size);
}

}  // namespace

TokenDistribution fetch_remote_distribution(const RemoteEndpoint& endpoint,
                                            std::span<const TokenId> context,
                                            double temperature) {
  if (context.empty()) {
    throw InvalidInputError("fetch_remote_distribution: empty context");
  }
  if (static_cast<int>(context.size()) >= endpoint.context_window) {
    throw ContextOverflowError("context exceeds the endpoint window");
  }
  if (endpoint.top_logprobs < 2) {
    throw InvalidInputError("fetch_remote_distribution: top_logprobs must be >= 2");
  }

  std::string body = endpoint.body_template;
  body = expand_template(body, "model", json(endpoint.model_name).dump(), false);
  body = expand_template(body, "context", "[" + token_ids_csv(context) + "]",
                         false);
  {
    std::ostringstream t;
    t << temperature;
    body = expand_template(body, "temperature", t.str(), false);
  }
  body = expand_template(body, "top_logprobs",
                         std::to_string(endpoint.top_logprobs), false);

  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(endpoint.timeout_ms / 1000,
                                (endpoint.timeout_ms % 1000) * 1000);
  client.set_read_timeout(endpoint.timeout_ms / 1000,
                          (endpoint.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }

  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt <= endpoint.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          endpoint.initial_backoff_ms << (attempt - 1)));
    }
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      continue;  // transport failure or timeout: retry
    }
    if (res->status >= 200 && res->status < 300) {
      return parse_response(endpoint, res->body);
    }
    last_status = res->status;
    last_body = res->body.substr(0, 200);
    if (res->status < 500) break;  // 4xx is not transient
  }

  if (last_status == 0) {
    throw SourceUnavailableError(
        "remote endpoint unreachable after " +
        std::to_string(endpoint.retry_limit + 1) + " attempts: " +
        endpoint.base_url);
  }
  throw EndpointError(last_status,
                      "remote endpoint returned status " +
                          std::to_string(last_status) + ": " + last_body);
}

struct RemoteSource::Impl {
  RemoteEndpoint endpoint;
  mutable std::mutex mutex;
  mutable std::condition_variable slot_free;
  mutable int in_flight = 0;
};

RemoteSource::RemoteSource(RemoteEndpoint endpoint)
    : impl_(std::make_unique<Impl>()) {
  if (endpoint.top_logprobs < 2) {
    throw InvalidInputError("RemoteSource: top_logprobs must be >= 2");
  }
  if (endpoint.max_concurrent < 1) {
    throw InvalidInputError("RemoteSource: max_concurrent must be >= 1");
  }
  if (endpoint.eos_token < 0 || endpoint.eos_token >= endpoint.vocab_size) {
    throw InvalidInputError("RemoteSource: eos token outside vocab");
  }
  impl_->endpoint = std::move(endpoint);
}

RemoteSource::~RemoteSource() = default;

TokenDistribution RemoteSource::next_distribution(
    std::span<const TokenId> context, double temperature) const {
  {
    std::unique_lock lock(impl_->mutex);
    impl_->slot_free.wait(lock, [&] {
      return impl_->in_flight < impl_->endpoint.max_concurrent;
    });
    ++impl_->in_flight;
  }
  try {
    TokenDistribution dist =
        fetch_remote_distribution(impl_->endpoint, context, temperature);
    std::lock_guard lock(impl_->mutex);
    --impl_->in_flight;
    impl_->slot_free.notify_one();
    return dist;
  } catch (...) {
    std::lock_guard lock(impl_->mutex);
    --impl_->in_flight;
    impl_->slot_free.notify_one();
    throw;
  }
}

int32_t RemoteSource::vocab_size() const { return impl_->endpoint.vocab_size; }
TokenId RemoteSource::eos_token() const { return impl_->endpoint.eos_token; }

}  // namespace eager
