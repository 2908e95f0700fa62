#include "wise/fetch.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "wise/html.hpp"
#include "wise/serialize.hpp"
#include "wise/url.hpp"

namespace wise {

namespace fs = std::filesystem;

namespace {

std::int64_t unix_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void write_atomically(const fs::path& path, const std::string& data) {
    // Unique temp name per writer so concurrent same-key writes never interleave.
    static std::atomic<unsigned> counter{0};
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp." << std::this_thread::get_id() << "."
             << counter.fetch_add(1);
    const fs::path tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << data;
    }
    fs::rename(tmp, path);
}

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parsed robots.txt: Disallow prefixes that apply to us.
std::vector<std::string> parse_robots(std::string_view body, std::string_view agent) {
    std::vector<std::string> disallow;
    std::istringstream in{std::string(body)};
    std::string line;
    bool group_applies = false;
    bool in_agent_block = false;
    const std::string agent_token = lower_copy(agent.substr(0, agent.find('/')));
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string key = lower_copy(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "user-agent") {
            if (!in_agent_block) group_applies = false;
            in_agent_block = true;
            const std::string v = lower_copy(value);
            if (v == "*" || (!agent_token.empty() && v.find(agent_token) != std::string::npos)) {
                group_applies = true;
            }
        } else {
            in_agent_block = false;
            if (group_applies && key == "disallow" && !value.empty()) disallow.push_back(value);
        }
    }
    return disallow;
}

}  // namespace

void FetchPolicy::validate() const {
    if (timeout.count() <= 0) throw ConfigError("fetch timeout must be > 0");
    if (max_bytes == 0) throw ConfigError("max_bytes must be > 0");
    if (politeness_delay.count() < 0) throw ConfigError("politeness delay must be >= 0");
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

// ---------------------------------------------------------------------------
// FetchCache

FetchCache::FetchCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_ / "objects");
    if (auto text = read_file(dir_ / "index.json")) {
        try {
            const auto j = json::parse(*text);
            for (const auto& [uri, e] : j.at("entries").items()) {
                index_[uri] = Entry{e.at("key").get<std::string>(),
                                    fetch_status_from_string(e.at("status").get<std::string>()),
                                    e.at("fetched_at").get<std::int64_t>()};
            }
        } catch (const std::exception&) {
            // A damaged index is rebuilt from subsequent puts; objects stay valid.
            index_.clear();
        }
    }
}

std::optional<RawContent> FetchCache::get(const std::string& uri) const {
    const auto text = read_file(dir_ / "objects" / (key_for(uri) + ".json"));
    if (!text) return std::nullopt;
    try {
        auto raw = json::parse(*text).get<RawContent>();
        if (raw.source.uri != uri) return std::nullopt;
        return raw;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void FetchCache::put(const RawContent& content) {
    const std::string key = key_for(content.source.uri);
    write_atomically(dir_ / "objects" / (key + ".json"), dump_pretty(json(content)));
    std::lock_guard lock(mutex_);
    index_[content.source.uri] = Entry{key, content.status, content.fetched_at};
    write_index_locked();
}

std::vector<std::string> FetchCache::uris() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    out.reserve(index_.size());
    for (const auto& [uri, _] : index_) out.push_back(uri);
    return out;
}

void FetchCache::clear() {
    std::lock_guard lock(mutex_);
    fs::remove_all(dir_ / "objects");
    fs::create_directories(dir_ / "objects");
    index_.clear();
    write_index_locked();
}

void FetchCache::write_index_locked() const {
    json entries = json::object();
    for (const auto& [uri, e] : index_) {
        entries[uri] = json{{"key", e.key}, {"status", to_string(e.status)}, {"fetched_at", e.fetched_at}};
    }
    write_atomically(dir_ / "index.json", dump_pretty(json{{"version", 1}, {"entries", entries}}));
}

// ---------------------------------------------------------------------------
// Response handling

FetchStatus classify_response(int http_status, std::string_view body) {
    if (http_status == 403 || http_status == 429 || http_status == 503) return FetchStatus::blocked;
    if (http_status == 401 || http_status == 402) return FetchStatus::paywalled;
    if (http_status == 404 || http_status == 410) return FetchStatus::not_found;
    if (http_status < 200 || http_status >= 300) return FetchStatus::network_error;

    const std::string head = lower_copy(body.substr(0, 64 * 1024));
    static constexpr std::string_view kBotMarkers[] = {
        "captcha", "are you a robot", "verify you are human", "unusual traffic from your",
        "access denied", "cf-browser-verification", "enable javascript and cookies to continue"};
    static constexpr std::string_view kPaywallMarkers[] = {
        "subscribe to continue reading", "subscribe to read", "purchase this article",
        "sign in to continue reading", "log in to continue reading", "this content is for subscribers",
        "buy this article", "institutional login required"};
    for (auto m : kBotMarkers) {
        if (head.find(m) != std::string::npos) return FetchStatus::blocked;
    }
    for (auto m : kPaywallMarkers) {
        if (head.find(m) != std::string::npos) return FetchStatus::paywalled;
    }
    return FetchStatus::ok;
}

RawContent make_raw_content(const SourceRef& source, std::string_view body,
                            std::string_view content_type, std::int64_t fetched_at) {
    auto doc = extract_document(body, media_type_for(content_type, source.uri), source.uri);
    RawContent raw;
    raw.source = source;
    raw.text = std::move(doc.text);
    raw.sections = std::move(doc.sections);
    raw.fetched_at = fetched_at;
    raw.status = FetchStatus::ok;
    for (auto& link : doc.links) {
        if (link.uri == source.uri) continue;
        link.parent = source.uri;
        link.layer = source.layer + 1;
        raw.links.push_back(std::move(link));
    }
    return raw;
}

RawContent failed_content(const SourceRef& source, FetchStatus status, std::string detail,
                          std::int64_t fetched_at) {
    RawContent raw;
    raw.source = source;
    raw.status = status;
    raw.detail = std::move(detail);
    raw.fetched_at = fetched_at;
    return raw;
}

// ---------------------------------------------------------------------------
// WebProvider

struct WebProvider::State {
    std::mutex mutex;
    std::unordered_map<std::string, std::chrono::steady_clock::time_point> next_slot;
    std::unordered_map<std::string, std::vector<std::string>> robots;
    std::unordered_map<std::string, std::shared_future<RawContent>> in_flight;
    std::atomic<std::size_t> network_calls{0};
};

WebProvider::WebProvider(FetchPolicy policy, std::shared_ptr<FetchCache> cache)
    : policy_(std::move(policy)), cache_(std::move(cache)), state_(std::make_unique<State>()) {
    policy_.validate();
}

WebProvider::~WebProvider() = default;

std::size_t WebProvider::network_calls() const { return state_->network_calls.load(); }

RawContent WebProvider::resolve(const SourceRef& source) {
    std::promise<RawContent> promise;
    std::shared_future<RawContent> future;
    bool owner = false;
    {
        std::lock_guard lock(state_->mutex);
        auto it = state_->in_flight.find(source.uri);
        if (it != state_->in_flight.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            state_->in_flight.emplace(source.uri, future);
            owner = true;
        }
    }
    if (!owner) {
        // Same uri already resolved (or resolving) in this run: identical content.
        RawContent raw = future.get();
        raw.source = source;
        return raw;
    }

    RawContent result;
    try {
        if (cache_) {
            if (auto hit = cache_->get(source.uri)) {
                hit->source = source;
                promise.set_value(*hit);
                return *hit;
            }
        }
        result = download(source);
        if (cache_) cache_->put(result);
    } catch (const std::exception& e) {
        result = failed_content(source, FetchStatus::network_error, e.what(), unix_now());
    }
    promise.set_value(result);
    return result;
}

RawContent WebProvider::download(const SourceRef& source) {
    const auto url = Url::parse(source.uri);
    if (!url || !url->absolute()) {
        return failed_content(source, FetchStatus::network_error, "not an absolute locator", unix_now());
    }

    if (url->scheme == "file") {
        state_->network_calls.fetch_add(1);
        auto body = read_file(fs::path(url->path));
        if (!body) return failed_content(source, FetchStatus::not_found, "no such file", unix_now());
        if (body->size() > policy_.max_bytes) body->resize(policy_.max_bytes);
        return make_raw_content(source, *body, "", unix_now());
    }
    if (url->scheme != "http" && url->scheme != "https") {
        return failed_content(source, FetchStatus::network_error, "unsupported scheme " + url->scheme,
                              unix_now());
    }

    const std::string origin = url->scheme + "://" + *url->authority;
    std::string target = url->path.empty() ? "/" : url->path;
    if (url->query) target += "?" + *url->query;

    auto make_client = [&] {
        auto cli = std::make_unique<httplib::Client>(origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy_.timeout - secs);
        cli->set_connection_timeout(secs.count(), usecs.count());
        cli->set_read_timeout(secs.count(), usecs.count());
        cli->set_write_timeout(secs.count(), usecs.count());
        cli->set_follow_location(true);
        cli->set_default_headers({{"User-Agent", policy_.user_agent}});
        return cli;
    };

    const std::string host = url->host();
    if (policy_.respect_robots) {
        std::vector<std::string> rules;
        bool known = false;
        {
            std::lock_guard lock(state_->mutex);
            if (auto it = state_->robots.find(host); it != state_->robots.end()) {
                rules = it->second;
                known = true;
            }
        }
        if (!known) {
            auto cli = make_client();
            if (auto res = cli->Get("/robots.txt"); res && res->status == 200) {
                rules = parse_robots(res->body, policy_.user_agent);
            }
            std::lock_guard lock(state_->mutex);
            state_->robots[host] = rules;
        }
        for (const auto& prefix : rules) {
            if (target.starts_with(prefix)) {
                return failed_content(source, FetchStatus::blocked, "disallowed by robots.txt", unix_now());
            }
        }
    }

    // Reserve the next politeness slot for this host, then wait for it.
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(state_->mutex);
        const auto now = std::chrono::steady_clock::now();
        auto& next = state_->next_slot[host];
        slot = std::max(now, next);
        next = slot + policy_.politeness_delay;
    }
    std::this_thread::sleep_until(slot);

    state_->network_calls.fetch_add(1);
    auto cli = make_client();
    std::string body;
    int status = 0;
    std::string content_type;
    bool truncated = false;
    auto res = cli->Get(
        target,
        [&](const httplib::Response& r) {
            status = r.status;
            content_type = r.get_header_value("Content-Type");
            return true;
        },
        [&](const char* data, std::size_t len) {
            const std::size_t room = policy_.max_bytes - body.size();
            body.append(data, std::min(room, len));
            if (body.size() >= policy_.max_bytes) {
                truncated = true;
                return false;
            }
            return true;
        });
    if (!res && !truncated) {
        return failed_content(source, FetchStatus::network_error, httplib::to_string(res.error()),
                              unix_now());
    }
    if (res) status = res->status;

    const FetchStatus verdict = classify_response(status, body);
    if (verdict != FetchStatus::ok) {
        return failed_content(source, verdict, "HTTP " + std::to_string(status), unix_now());
    }
    return make_raw_content(source, body, content_type, unix_now());
}

RawContent fetch(const SourceRef& source, const FetchPolicy& policy, const fs::path& cache_dir) {
    WebProvider provider(policy, std::make_shared<FetchCache>(cache_dir));
    return provider.resolve(source);
}

// ---------------------------------------------------------------------------
// Links and seeds

std::vector<SourceRef> extract_links(const RawContent& raw) {
    std::vector<SourceRef> out;
    std::set<std::string> seen;
    for (const auto& link : raw.links) {
        if (!is_crawlable_url(link.uri) || link.uri == raw.source.uri) continue;
        if (seen.insert(link.uri).second) out.push_back(link);
    }
    return out;
}

std::vector<SourceRef> extract_links(const FilteredContent& filtered,
                                     std::span<const SourceRef> candidates) {
    std::vector<SourceRef> out;
    std::set<std::string> seen;
    auto survived = [&](const SourceRef& link) {
        for (const auto& seg : filtered.segments) {
            if (seg.offset && link.anchor_span) {
                const std::size_t b = std::max(*seg.offset, link.anchor_span->offset);
                const std::size_t e = std::min(*seg.offset + seg.text.size(), link.anchor_span->end());
                if (b < e) return true;
                continue;
            }
            if (link.anchor_text && !link.anchor_text->empty() &&
                seg.text.find(*link.anchor_text) != std::string::npos) {
                return true;
            }
            if (seg.text.find(link.uri) != std::string::npos) return true;
        }
        return false;
    };
    for (const auto& link : candidates) {
        if (!is_crawlable_url(link.uri) || link.uri == filtered.source.uri) continue;
        if (seen.contains(link.uri) || !survived(link)) continue;
        seen.insert(link.uri);
        out.push_back(link);
    }
    return out;
}

std::vector<SourceRef> seed_sources(const Query& /*query*/, const fs::path& seed_file) {
    std::ifstream in(seed_file);
    if (!in) throw ConfigError("cannot read seed file: " + seed_file.string());
    std::vector<SourceRef> seeds;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!is_crawlable_url(t)) {
            throw ConfigError(seed_file.string() + ":" + std::to_string(line_no) +
                              ": not an absolute locator: " + t);
        }
        if (!seen.insert(t).second) continue;
        SourceRef ref;
        ref.uri = t;
        ref.layer = 0;
        seeds.push_back(std::move(ref));
    }
    if (seeds.empty()) throw ConfigError("seed file has no sources: " + seed_file.string());
    return seeds;
}

}  // namespace wise
