#pragma once

// Marginal-utility scoring of one source against the current container.
//
//   overlap        = |F ∩ K|
//   unique         = |F| - overlap            (= |F \ K|)
//   density        = unique / |F|             (0 when F is empty)
//   increase       = unique / |K|             (unset when K is empty)
//   combined       = unique / ln(1 + |F| + |K|)   (0 when unique == 0)
//
// All per-source scores of one layer are taken against the same frozen K.

#include <optional>
#include <stdexcept>

#include "wise/core.hpp"

namespace wise {

/// Raised when a filtered source and a container were tokenized under
/// different policies and therefore cannot be compared.
class PolicyMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace score {

std::size_t overlap(const TokenSet& filtered, const TokenSet& container);
std::size_t unique_contribution(const TokenSet& filtered, const TokenSet& container);
double knowledge_density(const TokenSet& filtered, const TokenSet& container);
std::optional<double> knowledge_increase(const TokenSet& filtered, const TokenSet& container);
double combined_score(const TokenSet& filtered, const TokenSet& container);

/// The combined score from the three counts alone.
double combined_from_counts(std::size_t unique, std::size_t word_count, std::size_t container_size);

SourceScore evaluate(const TokenSet& filtered, const TokenSet& container);

}  // namespace score

// Policy-checked entry points over the domain types.
std::size_t overlap(const FilteredContent& f, const KnowledgeContainer& k);
std::size_t unique_contribution(const FilteredContent& f, const KnowledgeContainer& k);
double knowledge_density(const FilteredContent& f, const KnowledgeContainer& k);
std::optional<double> knowledge_increase(const FilteredContent& f, const KnowledgeContainer& k);
double combined_score(const FilteredContent& f, const KnowledgeContainer& k);
SourceScore score_source(const FilteredContent& f, const KnowledgeContainer& k);

}  // namespace wise
