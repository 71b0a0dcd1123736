// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eager/errors.hpp"
#include "eager/source.hpp"

namespace eager {

using nlohmann::json;

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::scripted: return "scripted";
    case SourceKind::synthetic: return "synthetic";
    case SourceKind::remote: return "remote";
  }
  return "scripted";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "scripted") return SourceKind::scripted;
  if (s == "synthetic") return SourceKind::synthetic;
  if (s == "remote") return SourceKind::remote;
  throw InvalidInputError("unknown source kind: " + s);
}

ScriptedModel::ScriptedModel(int32_t vocab_size, TokenId eos_token, int window,
                             TokenDistribution default_dist)
    : vocab_size_(vocab_size),
      eos_token_(eos_token),
      window_(window),
      default_dist_(std::move(default_dist)) {
  if (window_ < 1) {
    throw InvalidInputError("ScriptedModel: window must be >= 1");
  }
  if (eos_token_ < 0 || eos_token_ >= vocab_size_) {
    throw InvalidInputError("ScriptedModel: eos token outside vocab");
  }
}

void ScriptedModel::add_transition(TokenList suffix, TokenDistribution dist) {
  if (suffix.empty() || static_cast<int>(suffix.size()) > window_) {
    throw InvalidInputError("ScriptedModel: suffix length must be in [1, window]");
  }
  transitions_[std::move(suffix)] = std::move(dist);
}

TokenDistribution ScriptedModel::next_distribution(
    std::span<const TokenId> context, double temperature) const {
  if (context.empty()) {
    throw InvalidInputError("next_distribution: empty context");
  }
  const size_t take = std::min(context.size(), static_cast<size_t>(window_));
  TokenList key(context.end() - take, context.end());
  auto it = transitions_.find(key);
  const TokenDistribution& base =
      it != transitions_.end() ? it->second : default_dist_;
  return base.with_temperature(temperature);
}

namespace {

TokenDistribution dist_from_json(const json& probs, int32_t vocab_size) {
  std::vector<TokenEntry> entries;
  entries.reserve(probs.size());
  for (auto it = probs.begin(); it != probs.end(); ++it) {
    entries.push_back({static_cast<TokenId>(std::stol(it.key())),
                       it.value().get<double>()});
  }
  return TokenDistribution(std::move(entries), vocab_size);
}

}  // namespace

ScriptedModel ScriptedModel::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scripted fixture: ") + e.what());
  }
  const int32_t vocab = doc.at("vocab_size").get<int32_t>();
  const TokenId eos = doc.at("eos_token").get<TokenId>();
  const int window = doc.value("window", 1);

  ScriptedModel model(vocab, eos, window,
                      dist_from_json(doc.at("default"), vocab));
  if (doc.contains("transitions")) {
    for (const json& t : doc.at("transitions")) {
      model.add_transition(t.at("context").get<TokenList>(),
                           dist_from_json(t.at("probs"), vocab));
    }
  }
  return model;
}

ScriptedModel ScriptedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("scripted fixture not readable: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace eager
