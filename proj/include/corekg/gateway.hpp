#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "corekg/errors.hpp"
#include "corekg/ingest.hpp"
#include "corekg/text.hpp"

namespace corekg {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    std::size_t max_output = 4096;
    std::string model_name = "llama3.3:70b";
    std::string stage_tag;  // e.g. "coref:person", "extraction", "baseline-extraction"
};

enum class BackendKind { http, mock, replay };

struct CompletionResponse {
    std::string text;
    BackendKind backend = BackendKind::mock;
    std::int64_t latency_ms = 0;
    std::string request_digest;
};

/// Stable content hash of the fields that determine the model output.
inline std::string request_digest(const CompletionRequest& req) {
    std::string key;
    key += req.prompt;
    key += '\x1f';
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.6f", req.temperature);
    key += tbuf;
    key += '\x1f';
    key += req.model_name;
    return text::digest(key);
}

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string complete_text(const CompletionRequest& req) = 0;
    virtual BackendKind kind() const = 0;
};

/// Deterministic scripted backend: fixture table keyed by request digest,
/// with an optional handler for anything not in the table.
class MockBackend : public CompletionBackend {
public:
    using Handler = std::function<std::string(const CompletionRequest&)>;

    MockBackend() = default;
    explicit MockBackend(Handler handler) : handler_(std::move(handler)) {}

    void add_fixture(const std::string& digest, std::string response) {
        fixtures_[digest] = std::move(response);
    }
    void add_fixture_for(const CompletionRequest& req, std::string response) {
        fixtures_[request_digest(req)] = std::move(response);
    }

    std::string complete_text(const CompletionRequest& req) override {
        auto it = fixtures_.find(request_digest(req));
        if (it != fixtures_.end()) return it->second;
        if (handler_) return handler_(req);
        throw BackendUnavailableError("mock backend has no fixture for request (stage " +
                                      req.stage_tag + ")");
    }
    BackendKind kind() const override { return BackendKind::mock; }

private:
    std::map<std::string, std::string> fixtures_;
    Handler handler_;
};

enum class WireFormat { ollama, openai };

struct HttpBackendConfig {
    std::string base_url = "http://localhost:11434";
    std::string path;  // defaults per wire format when empty
    WireFormat wire = WireFormat::ollama;
    std::string auth_header;  // full header value, e.g. "Bearer sk-..."
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    std::chrono::seconds timeout{300};
};

/// Minimal JSON-over-HTTP completion client speaking either the Ollama
/// /api/generate contract or an OpenAI-compatible /v1/completions contract.
class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.path.empty())
            cfg_.path = cfg_.wire == WireFormat::ollama ? "/api/generate" : "/v1/completions";
    }

    std::string complete_text(const CompletionRequest& req) override {
        nlohmann::json body;
        body["model"] = req.model_name;
        body["prompt"] = req.prompt;
        body["temperature"] = req.temperature;
        body["stream"] = false;
        if (cfg_.wire == WireFormat::openai) body["max_tokens"] = req.max_output;

        std::string last_error;
        auto backoff = cfg_.initial_backoff;
        for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(cfg_.base_url);
            client.set_read_timeout(cfg_.timeout);
            client.set_connection_timeout(cfg_.timeout);
            httplib::Headers headers;
            if (!cfg_.auth_header.empty()) headers.emplace("Authorization", cfg_.auth_header);
            auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error: HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendUnavailableError("completion endpoint returned HTTP " +
                                              std::to_string(res->status));
            return parse_response(res->body);
        }
        throw BackendUnavailableError("backend unavailable after " +
                                      std::to_string(cfg_.max_attempts) +
                                      " attempts: " + last_error);
    }
    BackendKind kind() const override { return BackendKind::http; }

private:
    std::string parse_response(const std::string& body) const {
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded())
            throw BackendUnavailableError("completion endpoint returned invalid JSON");
        if (cfg_.wire == WireFormat::ollama) {
            if (!j.contains("response"))
                throw BackendUnavailableError("ollama response missing 'response' field");
            return j["response"].get<std::string>();
        }
        if (!j.contains("choices") || j["choices"].empty())
            throw BackendUnavailableError("openai response missing 'choices'");
        const auto& choice = j["choices"][0];
        if (choice.contains("text")) return choice["text"].get<std::string>();
        if (choice.contains("message")) return choice["message"]["content"].get<std::string>();
        throw BackendUnavailableError("openai response choice has no text");
    }

    HttpBackendConfig cfg_;
};

/// Append-only on-disk cache of (request digest -> response text).
/// One UTF-8 file per digest plus a tab-separated index for auditing.
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    bool contains(const std::string& digest) const {
        return std::filesystem::exists(entry_path(digest));
    }

    std::string load(const std::string& digest) const {
        if (!contains(digest)) throw CacheMissError("replay store miss for digest " + digest);
        return read_text_file(entry_path(digest));
    }

    void store(const std::string& digest, const std::string& response,
               const std::string& stage_tag = "") {
        std::lock_guard<std::mutex> lock(mutex_);
        if (contains(digest)) return;
        write_text_file(entry_path(digest), response);
        std::ofstream index(dir_ / "index.tsv", std::ios::app);
        index << digest << '\t' << stage_tag << '\t' << response.size() << '\n';
    }

    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& digest) const {
        return dir_ / (digest + ".txt");
    }

    std::filesystem::path dir_;
    std::mutex mutex_;
};

enum class CacheMode {
    off,     // always call the backend
    record,  // call the backend and persist responses
    replay,  // strict: serve from the store only, miss is an error
    replay_or_record,  // serve from the store when present, else call and persist
};

/// Uniform completion entry point over backend + optional replay cache.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<CompletionBackend> backend,
                     std::shared_ptr<ReplayStore> store = nullptr,
                     CacheMode mode = CacheMode::off)
        : backend_(std::move(backend)), store_(std::move(store)), mode_(mode) {
        if ((mode_ != CacheMode::off) && !store_)
            throw ConfigError("cache mode requires a replay store");
    }

    CompletionResponse complete(const CompletionRequest& req) {
        if (req.prompt.empty()) throw ConfigError("completion request has empty prompt");
        CompletionResponse resp;
        resp.request_digest = request_digest(req);
        const auto t0 = std::chrono::steady_clock::now();
        if (mode_ == CacheMode::replay || mode_ == CacheMode::replay_or_record) {
            if (store_->contains(resp.request_digest)) {
                resp.text = store_->load(resp.request_digest);
                resp.backend = BackendKind::replay;
                resp.latency_ms = elapsed_ms(t0);
                return resp;
            }
            if (mode_ == CacheMode::replay)
                throw CacheMissError("strict replay: no cached response for digest " +
                                     resp.request_digest + " (stage " + req.stage_tag + ")");
        }
        if (!backend_) throw ConfigError("no completion backend configured");
        resp.text = backend_->complete_text(req);
        resp.backend = backend_->kind();
        if (mode_ == CacheMode::record || mode_ == CacheMode::replay_or_record)
            store_->store(resp.request_digest, resp.text, req.stage_tag);
        resp.latency_ms = elapsed_ms(t0);
        return resp;
    }

    CacheMode cache_mode() const { return mode_; }

private:
    static std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }

    std::shared_ptr<CompletionBackend> backend_;
    std::shared_ptr<ReplayStore> store_;
    CacheMode mode_;
};

/// Deterministic stand-in for coreference behavior: replaces every whole-word
/// occurrence of each surface form with its canonical form. Longest surface
/// form wins on overlap; all other bytes pass through unchanged.
inline std::string mock_alias_resolver(std::string_view input,
                                       const std::map<std::string, std::string>& alias_table) {
    std::vector<std::pair<std::string, std::string>> forms(alias_table.begin(),
                                                           alias_table.end());
    std::sort(forms.begin(), forms.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
        return a.first < b.first;
    });
    std::string out;
    out.reserve(input.size());
    std::size_t i = 0;
    while (i < input.size()) {
        bool matched = false;
        const bool left_ok = i == 0 || !text::is_word_char(input[i - 1]);
        if (left_ok) {
            for (const auto& [surface, canonical] : forms) {
                if (surface.empty() || i + surface.size() > input.size()) continue;
                if (input.substr(i, surface.size()) != surface) continue;
                const std::size_t after = i + surface.size();
                if (after < input.size() && text::is_word_char(input[after]) &&
                    text::is_word_char(surface.back()))
                    continue;
                out += canonical;
                i = after;
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.push_back(input[i]);
            ++i;
        }
    }
    return out;
}

}  // namespace corekg
