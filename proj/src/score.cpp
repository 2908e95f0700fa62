#include "wise/score.hpp"

#include <cmath>

namespace wise {

namespace score {

std::size_t overlap(const TokenSet& filtered, const TokenSet& container) {
    // Walk the smaller set and probe the larger.
    const TokenSet& small = filtered.size() <= container.size() ? filtered : container;
    const TokenSet& large = filtered.size() <= container.size() ? container : filtered;
    std::size_t n = 0;
    for (const auto& t : small) n += large.contains(t) ? 1 : 0;
    return n;
}

std::size_t unique_contribution(const TokenSet& filtered, const TokenSet& container) {
    return filtered.size() - overlap(filtered, container);
}

double knowledge_density(const TokenSet& filtered, const TokenSet& container) {
    if (filtered.empty()) return 0.0;
    return static_cast<double>(unique_contribution(filtered, container)) /
           static_cast<double>(filtered.size());
}

std::optional<double> knowledge_increase(const TokenSet& filtered, const TokenSet& container) {
    if (container.empty()) return std::nullopt;
    return static_cast<double>(unique_contribution(filtered, container)) /
           static_cast<double>(container.size());
}

double combined_from_counts(std::size_t unique, std::size_t word_count, std::size_t container_size) {
    if (unique == 0) return 0.0;
    return static_cast<double>(unique) /
           std::log(1.0 + static_cast<double>(word_count) + static_cast<double>(container_size));
}

double combined_score(const TokenSet& filtered, const TokenSet& container) {
    return combined_from_counts(unique_contribution(filtered, container), filtered.size(),
                                container.size());
}

SourceScore evaluate(const TokenSet& filtered, const TokenSet& container) {
    SourceScore s;
    s.word_count = filtered.size();
    s.overlap = overlap(filtered, container);
    s.unique_contribution = s.word_count - s.overlap;
    s.density = s.word_count == 0 ? 0.0
                                  : static_cast<double>(s.unique_contribution) /
                                        static_cast<double>(s.word_count);
    if (!container.empty()) {
        s.increase = static_cast<double>(s.unique_contribution) / static_cast<double>(container.size());
    }
    s.combined = combined_from_counts(s.unique_contribution, s.word_count, container.size());
    return s;
}

}  // namespace score

namespace {

void check_policy(const FilteredContent& f, const KnowledgeContainer& k) {
    if (f.policy_fingerprint != k.policy_fingerprint) {
        throw PolicyMismatch("token policy mismatch for " + f.source.uri + ": '" +
                             f.policy_fingerprint + "' vs container '" + k.policy_fingerprint + "'");
    }
}

}  // namespace

std::size_t overlap(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::overlap(f.tokens, k.tokens);
}

std::size_t unique_contribution(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::unique_contribution(f.tokens, k.tokens);
}

double knowledge_density(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::knowledge_density(f.tokens, k.tokens);
}

std::optional<double> knowledge_increase(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::knowledge_increase(f.tokens, k.tokens);
}

double combined_score(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::combined_score(f.tokens, k.tokens);
}

SourceScore score_source(const FilteredContent& f, const KnowledgeContainer& k) {
    check_policy(f, k);
    return score::evaluate(f.tokens, k.tokens);
}

}  // namespace wise
