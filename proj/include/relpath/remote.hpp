#pragma once

// HTTP JSON clients for a remote embedding service and a remote LLM.
//
//   embeddings: POST {"texts": [...]}                 -> {"vectors": [[...], ...]}
//   completion: POST {"prompt": "...", "max_tokens": n} -> {"text": "..."}
//
// Transport failures and non-2xx replies are retried at most twice.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "relpath/common.hpp"
#include "relpath/embed.hpp"
#include "relpath/prompt.hpp"

namespace relpath {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // at least "/"
};

inline Endpoint parse_endpoint(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ArgumentError("endpoint url needs a scheme: " + std::string(url));
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ArgumentError("unsupported url scheme: " + std::string(scheme));
  auto slash = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = std::string(url.substr(0, slash));
  e.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  if (e.origin.size() == scheme_end + 3) throw ArgumentError("endpoint url has no host: " + std::string(url));
  return e;
}

inline std::optional<std::string> env_var(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct HttpOptions {
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{200};
  std::string bearer_token;
};

// POSTs `body` and returns the parsed JSON reply. Throws ErrorT with the last
// failure once retries are exhausted.
template <class ErrorT>
nlohmann::json post_json(const Endpoint& ep, const nlohmann::json& body, const HttpOptions& opt) {
  std::string last_error;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(opt.retry_backoff * attempt);
    httplib::Client cli(ep.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(opt.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opt.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!opt.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + opt.bearer_token);
    auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      // A malformed body is not transient; do not retry.
      throw ErrorT(ep.origin + ep.path + ": malformed JSON reply: " + e.what());
    }
  }
  throw ErrorT(ep.origin + ep.path + ": " + last_error + " (after " + std::to_string(opt.max_retries) + " retries)");
}

struct RemoteEmbedderConfig {
  std::string url;  // empty: TTG_EMBED_URL
  std::size_t dim = 0;
  std::size_t batch_size = 64;
  HttpOptions http;
};

// Sends raw text (no normalization). Not deterministic as far as the cache
// is concerned; determinism then rests on the service.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty()) cfg_.url = env_var("TTG_EMBED_URL").value_or("");
    if (cfg_.url.empty()) throw ArgumentError("remote embedder needs a url (config or TTG_EMBED_URL)");
    if (cfg_.dim == 0) throw ArgumentError("remote embedder needs a positive dim");
    if (cfg_.batch_size == 0) cfg_.batch_size = 1;
    ep_ = parse_endpoint(cfg_.url);
    name_ = "remote:" + cfg_.url + ":" + std::to_string(cfg_.dim);
  }

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return cfg_.dim; }
  bool deterministic() const override { return false; }

  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); i += cfg_.batch_size) {
      auto batch = texts.subspan(i, std::min(cfg_.batch_size, texts.size() - i));
      nlohmann::json body{{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
      auto reply = post_json<ProviderError>(ep_, body, cfg_.http);
      if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array())
        throw ProviderError(name_ + ": reply has no vectors array");
      const auto& vecs = reply["vectors"];
      if (vecs.size() != batch.size()) throw ProviderError(name_ + ": reply vector count mismatch");
      for (const auto& v : vecs) {
        try {
          out.push_back(Embedding{v.get<std::vector<double>>()});
        } catch (const nlohmann::json::exception&) {
          throw ProviderError(name_ + ": vector is not a list of numbers");
        }
        if (out.back().dim() != cfg_.dim)
          throw ProviderError(name_ + ": expected dim " + std::to_string(cfg_.dim) + ", got " +
                              std::to_string(out.back().dim()));
      }
    }
    return out;
  }

 private:
  RemoteEmbedderConfig cfg_;
  Endpoint ep_;
  std::string name_;
};

struct RemoteLlmConfig {
  std::string url;
  std::string api_key;  // empty: TTG_LLM_API_KEY
  int max_tokens = 512;
  HttpOptions http;
};

class RemoteLlm final : public TextLlm {
 public:
  explicit RemoteLlm(RemoteLlmConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty()) throw ArgumentError("remote llm needs a url");
    if (cfg_.api_key.empty()) cfg_.api_key = env_var("TTG_LLM_API_KEY").value_or("");
    if (cfg_.max_tokens <= 0) throw ArgumentError("max_tokens must be positive");
    cfg_.http.bearer_token = cfg_.api_key;
    ep_ = parse_endpoint(cfg_.url);
  }

  std::string_view kind() const override { return "remote"; }

  std::string complete(const std::string& prompt) override {
    auto reply = post_json<GenerationError>(ep_, {{"prompt", prompt}, {"max_tokens", cfg_.max_tokens}}, cfg_.http);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
      throw GenerationError(cfg_.url + ": reply has no text field");
    return reply["text"].get<std::string>();
  }

 private:
  RemoteLlmConfig cfg_;
  Endpoint ep_;
};

}  // namespace relpath
