#pragma once

// Query-specific content refinement. A filter turns a source's raw text
// into the ordered spans relevant to the query, plus their token set.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wise/core.hpp"
#include "wise/tokenize.hpp"

namespace wise {

/// The filter could not produce output for a source (LLM endpoint down
/// after retries, malformed response). The engine scores such a source 0.
class FilterError : public std::runtime_error {
public:
    FilterError(std::string source_uri, const std::string& what)
        : std::runtime_error(source_uri + ": " + what), source_uri_(std::move(source_uri)) {}
    [[nodiscard]] const std::string& source_uri() const { return source_uri_; }

private:
    std::string source_uri_;
};

class ContentFilter {
public:
    virtual ~ContentFilter() = default;
    /// Requires raw.status == ok. Must be safe to call concurrently.
    virtual FilteredContent filter(const Query& query, const RawContent& raw) = 0;
    [[nodiscard]] virtual const TokenPolicy& policy() const = 0;
};

/// Sentence-sized pieces of `text`, each a verbatim substring with its
/// offset. Boundaries are line breaks and [.!?] followed by whitespace.
/// Surrounding whitespace is excluded from each piece.
std::vector<Segment> split_sentences(std::string_view text);

/// Builds FilteredContent from already chosen segments.
FilteredContent make_filtered(const SourceRef& source, std::vector<Segment> segments,
                              const TokenPolicy& policy);

struct ExtractiveFilterConfig {
    std::size_t keep_threshold = 1;  // distinct query tokens a sentence must contain
    std::size_t window = 0;          // neighbouring sentences kept on each side

    void validate() const;
};

/// Keeps every sentence sharing at least keep_threshold distinct tokens
/// with the query. Deterministic and verbatim: output segments are exact
/// substrings of the raw text and the output token set is a subset of the
/// raw text's token set.
class ExtractiveFilter : public ContentFilter {
public:
    explicit ExtractiveFilter(TokenPolicy policy, ExtractiveFilterConfig config = {});

    FilteredContent filter(const Query& query, const RawContent& raw) override;
    [[nodiscard]] const TokenPolicy& policy() const override { return policy_; }
    [[nodiscard]] const ExtractiveFilterConfig& config() const { return config_; }

private:
    TokenPolicy policy_;
    ExtractiveFilterConfig config_;
};

/// 1 - |F| / |tokens(raw)|. Unset when the raw text has no tokens.
std::optional<double> reduction_ratio(std::size_t raw_token_count, std::size_t filtered_word_count);
std::optional<double> reduction_ratio(const RawContent& raw, const FilteredContent& filtered,
                                      const TokenPolicy& policy);

}  // namespace wise
