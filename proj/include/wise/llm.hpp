#pragma once

// LLM-backed content filter.
//
// Wire protocol: HTTP POST of {"model", "messages":[{"role","content"}],
// "temperature"} to a chat-completion style endpoint, bearer key taken from
// the WISE_LLM_API_KEY environment variable. Responses are read from
// choices[0].message.content (OpenAI style), message.content, or content.
//
// Every request/response pair is stored in a replay cache keyed by the
// SHA-256 of (model, temperature, prompt); a recorded run replays without
// touching the network.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wise/filter.hpp"

namespace wise {

inline constexpr std::string_view kApiKeyEnv = "WISE_LLM_API_KEY";
inline constexpr std::size_t kModelContextTokens = 128000;

/// Shipped prompt. The model is asked for verbatim excerpts only, one per
/// line, or the single word NONE.
extern const std::string_view kDefaultFilterPrompt;

class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Throws LlmError on transport or protocol failure.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

class HttpChatClient : public ChatClient {
public:
    HttpChatClient(std::string endpoint, std::string model, double temperature,
                   std::chrono::milliseconds timeout = std::chrono::seconds(120));

    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    std::string endpoint_;
    std::string model_;
    double temperature_;
    std::chrono::milliseconds timeout_;
};

/// JSON request body for one completion.
std::string chat_request_body(std::string_view model, const std::vector<ChatMessage>& messages,
                              double temperature);
/// Pulls the assistant text out of a completion response body.
std::string parse_chat_response(std::string_view body);

class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, std::string_view request, std::string_view response);

    static std::string key_for(std::string_view model, double temperature, std::string_view prompt);

private:
    std::filesystem::path dir_;
    mutable std::shared_mutex mutex_;
};

struct LlmFilterConfig {
    std::string endpoint;
    std::string model = "gpt-4o";
    std::string prompt_template{kDefaultFilterPrompt};
    std::size_t chunk_size = 6000;  // whitespace words per request
    int max_retries = 3;
    double temperature = 0.0;
    int max_concurrent = 4;
    std::chrono::milliseconds retry_backoff{500};

    void validate() const;
};

/// Substitutes {query} and {content}.
std::string render_prompt(std::string_view prompt_template, std::string_view query,
                          std::string_view content);

/// Groups sections into chunks of at most chunk_size words. A section that
/// is larger on its own is split on sentence boundaries.
std::vector<std::string> chunk_sections(const RawContent& raw, std::size_t chunk_size);

/// One excerpt per non-empty line; bullets and wrapping quotes are removed.
/// "NONE" means no excerpts.
std::vector<std::string> parse_excerpts(std::string_view response);

class LlmFilter : public ContentFilter {
public:
    LlmFilter(LlmFilterConfig config, std::shared_ptr<ChatClient> client, TokenPolicy policy,
              std::shared_ptr<ReplayCache> replay = nullptr, std::ostream* log = nullptr);

    /// Throws FilterError after max_retries failed attempts on any chunk.
    FilteredContent filter(const Query& query, const RawContent& raw) override;
    [[nodiscard]] const TokenPolicy& policy() const override { return policy_; }

private:
    std::string ask(const std::string& prompt, const std::string& source_uri);

    LlmFilterConfig config_;
    std::shared_ptr<ChatClient> client_;
    TokenPolicy policy_;
    std::shared_ptr<ReplayCache> replay_;
    std::ostream* log_;
    std::counting_semaphore<256> slots_;
    std::mutex log_mutex_;
};

}  // namespace wise
