#include "wise/filter.hpp"

#include <algorithm>
#include <cctype>

#include "wise/score.hpp"

namespace wise {

std::vector<Segment> split_sentences(std::string_view text) {
    std::vector<Segment> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
        if (e > b) out.push_back(Segment{std::string(text.substr(b, e - b)), b});
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n' || c == '\r') {
            emit(start, i);
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
                   (text[i + 1] == ' ' || text[i + 1] == '\t' || text[i + 1] == '\n' ||
                    text[i + 1] == '\r')) {
            emit(start, i + 1);
            start = i + 1;
        }
    }
    emit(start, text.size());
    return out;
}

FilteredContent make_filtered(const SourceRef& source, std::vector<Segment> segments,
                              const TokenPolicy& policy) {
    FilteredContent f;
    f.source = source;
    for (const auto& seg : segments) {
        for (auto& t : tokenize(seg.text, policy)) f.tokens.insert(std::move(t));
    }
    f.segments = std::move(segments);
    f.policy_fingerprint = policy.fingerprint();
    return f;
}

void ExtractiveFilterConfig::validate() const {
    if (keep_threshold < 1) throw ConfigError("keep_threshold must be >= 1");
}

ExtractiveFilter::ExtractiveFilter(TokenPolicy policy, ExtractiveFilterConfig config)
    : policy_(std::move(policy)), config_(config) {
    policy_.validate();
    config_.validate();
}

FilteredContent ExtractiveFilter::filter(const Query& query, const RawContent& raw) {
    if (raw.status != FetchStatus::ok) {
        throw FilterError(raw.source.uri, "cannot filter content with status " +
                                              std::string(to_string(raw.status)));
    }
    const TokenSet query_tokens = token_set(query.text, policy_);
    const auto sentences = split_sentences(raw.text);

    std::vector<bool> keep(sentences.size(), false);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const TokenSet st = token_set(sentences[i].text, policy_);
        if (score::overlap(st, query_tokens) < config_.keep_threshold) continue;
        const std::size_t lo = i >= config_.window ? i - config_.window : 0;
        const std::size_t hi = std::min(sentences.size() - 1, i + config_.window);
        for (std::size_t k = lo; k <= hi; ++k) keep[k] = true;
    }

    std::vector<Segment> segments;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (keep[i]) segments.push_back(sentences[i]);
    }
    return make_filtered(raw.source, std::move(segments), policy_);
}

std::optional<double> reduction_ratio(std::size_t raw_token_count, std::size_t filtered_word_count) {
    if (raw_token_count == 0) return std::nullopt;
    // An abstractive filter can emit tokens absent from the source; the
    // ratio is floored at 0 so it stays a reduction.
    const double kept = static_cast<double>(filtered_word_count) / static_cast<double>(raw_token_count);
    return std::max(0.0, 1.0 - kept);
}

std::optional<double> reduction_ratio(const RawContent& raw, const FilteredContent& filtered,
                                      const TokenPolicy& policy) {
    return reduction_ratio(token_set(raw.text, policy).size(), filtered.word_count());
}

}  // namespace wise
