#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * HTTP client for a logprobs-serving completion endpoint.
 *
 * One POST per decode step asks for a single next token with per-token
 * top-logprobs; the response is parsed into a truncated TokenDistribution
 * (probabilities exp(logprob), not renormalized; downstream consumers
 * renormalize over top-K). The server applies the sampling temperature,
 * which is forwarded in the request body.
 *
 * The request body is built from a JSON template with ${model},
 * ${context}, ${temperature} and ${top_logprobs} placeholders so that
 * OpenAI-compatible servers with different field names can be targeted
 * without code changes.
 */

#include <memory>
#include <string>

#include "eager/source.hpp"

namespace eager {

struct RemoteEndpoint {
  std::string base_url;       // e.g. "http://127.0.0.1:8080"
  std::string model_name;
  int top_logprobs = 20;      // >= 2; branching needs the top two tokens
  int timeout_ms = 5000;
  int retry_limit = 2;        // retries after the first attempt
  int initial_backoff_ms = 50;
  int max_concurrent = 8;     // bound on outstanding requests
  int32_t vocab_size = 0;
  TokenId eos_token = 0;
  int context_window = 32768;
  std::string api_key;        // sent as a bearer token when non-empty

  // Request template and the dot-path to the token->logprob object in the
  // response. Defaults speak a token-id-native OpenAI-completions dialect.
  std::string path = "/v1/completions";
  std::string body_template =
      R"({"model":"${model}","prompt":"${context}","max_tokens":1,)"
      R"("temperature":"${temperature}","logprobs":"${top_logprobs}"})";
  std::string response_logprobs_path = "choices.0.logprobs.top_logprobs.0";
};

/**
 * Fetches one next-token distribution. Retries transport failures,
 * timeouts and 5xx responses with exponential backoff up to retry_limit.
 *
 * Throws:
 *  - SourceUnavailableError  after exhausting retries on transport errors
 *  - EndpointError           for non-2xx responses (immediately on 4xx)
 *  - ParseError              for malformed response bodies
 *  - InsufficientLogprobsError  when fewer than 2 logprobs come back
 *  - ContextOverflowError    when the context exceeds the window
 */
TokenDistribution fetch_remote_distribution(const RemoteEndpoint& endpoint,
                                            std::span<const TokenId> context,
                                            double temperature);

/// TokenSource adapter over an endpoint; bounds request concurrency.
class RemoteSource : public TokenSource {
 public:
  explicit RemoteSource(RemoteEndpoint endpoint);
  ~RemoteSource() override;

  TokenDistribution next_distribution(std::span<const TokenId> context,
                                      double temperature) const override;
  int32_t vocab_size() const override;
  TokenId eos_token() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eager
