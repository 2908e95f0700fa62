#pragma once

// Source retrieval: HTTP(S) and file:// locators, plain-text extraction,
// outgoing link discovery, and an on-disk cache that makes every run
// replayable.
//
// Cache layout under cache_dir:
//   index.json            {"version":1,"entries":{uri:{"key","status","fetched_at"}}}
//   objects/<key>.json    one serialized RawContent per uri
// where key is the SHA-256 of the uri, hex encoded.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wise/core.hpp"

namespace wise {

struct FetchPolicy {
    std::chrono::milliseconds timeout{15000};
    std::chrono::milliseconds politeness_delay{1000};  // per host
    std::size_t max_bytes = 8 * 1024 * 1024;
    std::string user_agent = "wise-extractor/1.0 (+research crawler)";
    bool respect_robots = true;
    int max_redirects = 5;

    void validate() const;
};

/// Anything that can turn a SourceRef into RawContent: the live web, the
/// cache, or a synthetic corpus. Implementations must be safe to call from
/// concurrent tasks.
class ContentProvider {
public:
    virtual ~ContentProvider() = default;
    virtual RawContent resolve(const SourceRef& source) = 0;
};

/// Stand-in for a similarity search over the query. Only the seed-file
/// implementation exists; a web-search backend would implement this too.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SourceRef> search(const Query& query) = 0;
};

std::string sha256_hex(std::string_view data);

class FetchCache {
public:
    /// Creates the directory if needed and loads the index.
    explicit FetchCache(std::filesystem::path dir);

    std::optional<RawContent> get(const std::string& uri) const;
    /// Idempotent for the same uri; distinct uris may be written concurrently.
    void put(const RawContent& content);
    std::vector<std::string> uris() const;
    void clear();

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }
    static std::string key_for(std::string_view uri) { return sha256_hex(uri); }

private:
    struct Entry {
        std::string key;
        FetchStatus status;
        std::int64_t fetched_at;
    };

    void write_index_locked() const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> index_;
};

/// Maps an HTTP response to a fetch status. 403/429 and bot-check pages are
/// blocked; 401/402 and login or subscription walls are paywalled.
FetchStatus classify_response(int http_status, std::string_view body);

/// Builds RawContent from a successful response body.
RawContent make_raw_content(const SourceRef& source, std::string_view body,
                            std::string_view content_type, std::int64_t fetched_at);

/// A failed fetch: empty text, no links.
RawContent failed_content(const SourceRef& source, FetchStatus status, std::string detail,
                          std::int64_t fetched_at);

/// Live provider: cache first, then the network (or the local filesystem for
/// file:// locators). Requests to one host are spaced by politeness_delay.
class WebProvider : public ContentProvider {
public:
    WebProvider(FetchPolicy policy, std::shared_ptr<FetchCache> cache);
    ~WebProvider() override;

    RawContent resolve(const SourceRef& source) override;

    /// Number of network (or file) reads performed, cache hits excluded.
    [[nodiscard]] std::size_t network_calls() const;

private:
    struct State;
    RawContent download(const SourceRef& source);

    FetchPolicy policy_;
    std::shared_ptr<FetchCache> cache_;
    std::unique_ptr<State> state_;
};

RawContent fetch(const SourceRef& source, const FetchPolicy& policy, const std::filesystem::path& cache_dir);

/// Outgoing links of a fetched document (already absolute and deduplicated).
std::vector<SourceRef> extract_links(const RawContent& raw);

/// The subset of `candidates` whose anchor survived filtering: the anchor
/// span lies inside a retained segment, or (for segments without a known
/// offset) the anchor text or the uri appears in a retained segment.
std::vector<SourceRef> extract_links(const FilteredContent& filtered,
                                     std::span<const SourceRef> candidates);

/// Seed file: one locator per line, UTF-8, '#' comment lines. Returns
/// layer-0 refs in file order with duplicates removed. Throws ConfigError
/// when the file is missing, empty, or has a non-absolute locator.
std::vector<SourceRef> seed_sources(const Query& query, const std::filesystem::path& seed_file);

class SeedFileSearch : public SearchProvider {
public:
    explicit SeedFileSearch(std::filesystem::path path) : path_(std::move(path)) {}
    std::vector<SourceRef> search(const Query& query) override { return seed_sources(query, path_); }

private:
    std::filesystem::path path_;
};

}  // namespace wise
