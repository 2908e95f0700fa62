#include "wise/llm.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "wise/fetch.hpp"
#include "wise/serialize.hpp"
#include "wise/url.hpp"

namespace wise {

namespace fs = std::filesystem;

const std::string_view kDefaultFilterPrompt =
    "You are filtering a web document for a research question.\n"
    "Question: {query}\n"
    "\n"
    "Copy every passage of the document below that helps answer the question. "
    "Copy passages verbatim, exactly as they appear, without rewording, summarizing "
    "or adding anything. Put each passage on its own line. Keep passages in document "
    "order. If nothing is relevant, reply with the single word NONE.\n"
    "\n"
    "Document:\n"
    "{content}\n";

namespace {

constexpr std::string_view kSystemPrompt =
    "You extract verbatim, query-relevant excerpts from documents. You never paraphrase.";

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transport

std::string chat_request_body(std::string_view model, const std::vector<ChatMessage>& messages,
                              double temperature) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back(json{{"role", m.role}, {"content", m.content}});
    return json{{"model", model}, {"messages", msgs}, {"temperature", temperature}}.dump();
}

std::string parse_chat_response(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw LlmError(std::string("response is not JSON: ") + e.what());
    }
    try {
        if (j.contains("choices") && !j["choices"].empty()) {
            return j["choices"][0].at("message").at("content").get<std::string>();
        }
        if (j.contains("message")) return j["message"].at("content").get<std::string>();
        if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
    } catch (const json::exception& e) {
        throw LlmError(std::string("unexpected response shape: ") + e.what());
    }
    throw LlmError("response has no completion text");
}

HttpChatClient::HttpChatClient(std::string endpoint, std::string model, double temperature,
                               std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), temperature_(temperature), timeout_(timeout) {
    auto u = Url::parse(endpoint_);
    if (!u || !u->authority || (u->scheme != "http" && u->scheme != "https")) {
        throw ConfigError("LLM endpoint must be an http(s) URL: " + endpoint_);
    }
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    const auto u = Url::parse(endpoint_);
    httplib::Client cli(u->scheme + "://" + *u->authority);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    cli.set_connection_timeout(secs.count(), 0);
    cli.set_read_timeout(secs.count(), 0);
    cli.set_write_timeout(secs.count(), 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    std::string path = u->path.empty() ? "/" : u->path;
    if (u->query) path += "?" + *u->query;

    auto res = cli.Post(path, headers, chat_request_body(model_, messages, temperature_), "application/json");
    if (!res) throw LlmError("LLM request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw LlmError("LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    return parse_chat_response(res->body);
}

// ---------------------------------------------------------------------------
// Replay cache

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string ReplayCache::key_for(std::string_view model, double temperature, std::string_view prompt) {
    std::ostringstream material;
    material << model << '\n' << json(temperature).dump() << '\n' << prompt;
    return sha256_hex(material.str());
}

std::optional<std::string> ReplayCache::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        return j.at("response").get<std::string>();
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

void ReplayCache::put(const std::string& key, std::string_view request, std::string_view response) {
    std::unique_lock lock(mutex_);
    const fs::path path = dir_ / (key + ".json");
    const fs::path tmp = dir_ / (key + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << dump_pretty(json{{"key", key}, {"request", request}, {"response", response}});
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Filter

void LlmFilterConfig::validate() const {
    if (endpoint.empty()) throw ConfigError("LLM filter needs an endpoint");
    if (chunk_size == 0 || chunk_size >= kModelContextTokens) {
        throw ConfigError("chunk_size must be in (0, model context window)");
    }
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (max_concurrent < 1 || max_concurrent > 256) throw ConfigError("max_concurrent must be in [1, 256]");
    if (prompt_template.find("{content}") == std::string::npos) {
        throw ConfigError("prompt template has no {content} slot");
    }
}

std::string render_prompt(std::string_view prompt_template, std::string_view query, std::string_view content) {
    std::string out;
    out.reserve(prompt_template.size() + query.size() + content.size());
    for (std::size_t i = 0; i < prompt_template.size();) {
        if (prompt_template.substr(i).starts_with("{query}")) {
            out += query;
            i += 7;
        } else if (prompt_template.substr(i).starts_with("{content}")) {
            out += content;
            i += 9;
        } else {
            out += prompt_template[i++];
        }
    }
    return out;
}

std::vector<std::string> chunk_sections(const RawContent& raw, std::size_t chunk_size) {
    std::vector<std::string> pieces;
    if (raw.sections.empty()) {
        if (!raw.text.empty()) pieces.push_back(raw.text);
    } else {
        for (const auto& s : raw.sections) pieces.push_back(s.text);
    }

    std::vector<std::string> chunks;
    std::string current;
    std::size_t current_words = 0;
    auto flush = [&] {
        if (!current.empty()) chunks.push_back(std::move(current));
        current.clear();
        current_words = 0;
    };
    auto add = [&](const std::string& piece, std::size_t words) {
        if (current_words + words > chunk_size) flush();
        current += piece;
        if (!piece.empty() && piece.back() != '\n') current += '\n';
        current_words += words;
    };
    for (const auto& piece : pieces) {
        const std::size_t words = word_count(piece);
        if (words <= chunk_size) {
            add(piece, words);
            continue;
        }
        for (const auto& sentence : split_sentences(piece)) {
            add(sentence.text, word_count(sentence.text));
        }
    }
    flush();
    return chunks;
}

std::vector<std::string> parse_excerpts(std::string_view response) {
    std::vector<std::string> out;
    const std::string trimmed = trim(response);
    if (trimmed == "NONE" || trimmed == "NONE.") return out;
    std::istringstream in{std::string(response)};
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.starts_with("- ") || t.starts_with("* ")) t = trim(t.substr(2));
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
        if (t.empty() || t == "NONE" || t.starts_with("```")) continue;
        out.push_back(std::move(t));
    }
    return out;
}

LlmFilter::LlmFilter(LlmFilterConfig config, std::shared_ptr<ChatClient> client, TokenPolicy policy,
                     std::shared_ptr<ReplayCache> replay, std::ostream* log)
    : config_(std::move(config)),
      client_(std::move(client)),
      policy_(std::move(policy)),
      replay_(std::move(replay)),
      log_(log),
      slots_(config_.max_concurrent) {
    config_.validate();
    policy_.validate();
    if (!client_) throw ConfigError("LLM filter needs a chat client");
}

std::string LlmFilter::ask(const std::string& prompt, const std::string& source_uri) {
    const std::string key = ReplayCache::key_for(config_.model, config_.temperature, prompt);
    if (replay_) {
        if (auto hit = replay_->get(key)) {
            if (log_) {
                std::lock_guard lock(log_mutex_);
                *log_ << "[llm] replay " << key << " " << source_uri << "\n";
            }
            return *hit;
        }
    }
    const std::vector<ChatMessage> messages{{"system", std::string(kSystemPrompt)}, {"user", prompt}};
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);
        try {
            slots_.acquire();
            std::string response;
            try {
                response = client_->complete(messages);
            } catch (...) {
                slots_.release();
                throw;
            }
            slots_.release();
            if (replay_) {
                replay_->put(key, chat_request_body(config_.model, messages, config_.temperature), response);
            }
            if (log_) {
                std::lock_guard lock(log_mutex_);
                *log_ << "[llm] live " << key << " " << source_uri << " attempt=" << attempt + 1 << "\n";
            }
            return response;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw FilterError(source_uri, "LLM filter failed after " + std::to_string(config_.max_retries + 1) +
                                      " attempts: " + last_error);
}

FilteredContent LlmFilter::filter(const Query& query, const RawContent& raw) {
    if (raw.status != FetchStatus::ok) {
        throw FilterError(raw.source.uri, "cannot filter content with status " +
                                              std::string(to_string(raw.status)));
    }
    std::vector<Segment> segments;
    std::size_t verbatim = 0;
    std::size_t search_from = 0;
    for (const auto& chunk : chunk_sections(raw, config_.chunk_size)) {
        const std::string response = ask(render_prompt(config_.prompt_template, query.text, chunk), raw.source.uri);
        for (auto& excerpt : parse_excerpts(response)) {
            Segment seg{std::move(excerpt), std::nullopt};
            auto pos = raw.text.find(seg.text, search_from);
            if (pos == std::string::npos) pos = raw.text.find(seg.text);
            if (pos != std::string::npos) {
                seg.offset = pos;
                search_from = pos + seg.text.size();
                ++verbatim;
            }
            segments.push_back(std::move(seg));
        }
    }
    const std::size_t total = segments.size();
    FilteredContent f = make_filtered(raw.source, std::move(segments), policy_);
    f.verbatim_fraction = total == 0 ? 1.0 : static_cast<double>(verbatim) / static_cast<double>(total);
    return f;
}

}  // namespace wise
