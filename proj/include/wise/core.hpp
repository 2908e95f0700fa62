#pragma once

// Domain types shared by every stage of the extraction pipeline.
//
// All of these are plain value types. Stages never mutate an input in
// place; they build a successor value (a new container, a new layer record).

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wise {

/// Distinct normalized tokens. Ordered so serialization is sorted for free.
using TokenSet = std::set<std::string, std::less<>>;

/// Raised for invalid user-supplied configuration (bad flags, bad seed file,
/// violated EngineConfig invariants).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Query {
    std::string id;
    std::string text;

    /// Throws ConfigError when `text` is blank after trimming.
    static Query make(std::string text, std::string id = {});
};

struct TextSpan {
    std::size_t offset = 0;
    std::size_t length = 0;

    [[nodiscard]] std::size_t end() const { return offset + length; }
    friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct SourceRef {
    std::string uri;
    std::optional<std::string> parent;  // uri of the discovering source
    int layer = 0;
    std::optional<std::string> anchor_text;
    // Location of the anchor inside the parent's extracted text, when known.
    std::optional<TextSpan> anchor_span;

    friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

enum class FetchStatus { ok, blocked, paywalled, network_error, not_found };

std::string_view to_string(FetchStatus s);
FetchStatus fetch_status_from_string(std::string_view s);

struct Section {
    std::string id;
    std::string text;

    friend bool operator==(const Section&, const Section&) = default;
};

struct RawContent {
    SourceRef source;
    std::string text;  // empty iff status != ok
    std::vector<SourceRef> links;
    std::vector<Section> sections;
    std::int64_t fetched_at = 0;  // unix seconds
    FetchStatus status = FetchStatus::ok;
    std::string detail;  // diagnostic for non-ok statuses

    friend bool operator==(const RawContent&, const RawContent&) = default;
};

/// A retained span of source text. `offset` is set when the span is a
/// verbatim substring of the raw text at that position.
struct Segment {
    std::string text;
    std::optional<std::size_t> offset;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct FilteredContent {
    SourceRef source;
    std::vector<Segment> segments;
    TokenSet tokens;
    std::string policy_fingerprint;
    // Fraction of segments found verbatim in the raw text. Only the LLM
    // filter reports it; the extractive filter is verbatim by construction.
    std::optional<double> verbatim_fraction;

    [[nodiscard]] std::size_t word_count() const { return tokens.size(); }
};

struct ContainerSegment {
    std::string text;
    std::string source_uri;
    int layer = 0;

    friend bool operator==(const ContainerSegment&, const ContainerSegment&) = default;
};

struct KnowledgeContainer {
    TokenSet tokens;
    std::vector<ContainerSegment> segments;
    std::string policy_fingerprint;

    [[nodiscard]] std::size_t size() const { return tokens.size(); }
};

struct SourceScore {
    std::size_t word_count = 0;
    std::size_t overlap = 0;
    std::size_t unique_contribution = 0;
    double density = 0.0;
    std::optional<double> increase;  // unset while the container is empty
    double combined = 0.0;
};

enum class FilterMode { extractive, llm };
enum class StopwordPolicy { none, builtin, custom };

std::string_view to_string(FilterMode m);
FilterMode filter_mode_from_string(std::string_view s);
std::string_view to_string(StopwordPolicy p);
StopwordPolicy stopword_policy_from_string(std::string_view s);

struct EngineConfig {
    double threshold = 20.0;
    int top_k = 2;
    int max_layers = 8;
    FilterMode filter_mode = FilterMode::extractive;
    StopwordPolicy stopword_policy = StopwordPolicy::builtin;
    std::string stopword_file;  // used when stopword_policy == custom
    std::uint64_t random_seed = 0;
    std::chrono::milliseconds politeness_delay{1000};
    std::string cache_dir = ".wise-cache";
    int max_in_flight = 8;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

enum class TerminationReason { threshold, exhausted, max_layers };

std::string_view to_string(TerminationReason r);
TerminationReason termination_reason_from_string(std::string_view s);

struct SourceOutcome {
    SourceRef source;
    FetchStatus status = FetchStatus::ok;
    std::size_t raw_token_count = 0;  // distinct tokens in the raw text
    SourceScore score;
    std::optional<double> verbatim_fraction;
    std::string error;
};

struct LayerRecord {
    int index = 0;
    std::vector<SourceOutcome> sources;
    std::vector<std::string> selected;  // uris, best first
    std::size_t container_before = 0;
    std::size_t container_after = 0;
    std::optional<double> max_score;
    std::optional<TerminationReason> termination_reason;
};

struct RunTrace {
    Query query;
    EngineConfig config;
    std::vector<LayerRecord> layers;
};

std::string trim(std::string_view s);

}  // namespace wise
