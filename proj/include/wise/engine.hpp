#pragma once

// The layered exploration loop.
//
// For each layer: fetch, filter and score every source against the frozen
// container; stop if the layer is empty, nothing was fetchable, or the best
// combined score is below the threshold; otherwise keep the top-k sources,
// fuse their filtered content into the container, and follow the links that
// survived filtering in those sources to form the next layer. A layer that
// trips the threshold is never fused.

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wise/core.hpp"
#include "wise/fetch.hpp"
#include "wise/filter.hpp"

namespace wise {

class Fusion {
public:
    virtual ~Fusion() = default;
    /// Must return a container whose token set contains `current`'s.
    virtual KnowledgeContainer merge(const KnowledgeContainer& current,
                                     std::span<const FilteredContent> selected) = 0;
};

/// Exact token union; segments appended sentence by sentence in selection
/// order, skipping sentences already present verbatim.
KnowledgeContainer merge_default(const KnowledgeContainer& current,
                                 std::span<const FilteredContent> selected);

class UnionFusion : public Fusion {
public:
    KnowledgeContainer merge(const KnowledgeContainer& current,
                             std::span<const FilteredContent> selected) override {
        return merge_default(current, selected);
    }
};

KnowledgeContainer empty_container(const TokenPolicy& policy);

struct ScoredRef {
    SourceRef source;
    SourceScore score;
};

/// Descending combined score; ties by higher unique contribution, then by
/// lexicographically smaller uri. Returns at most k entries.
std::vector<ScoredRef> select_top_k(std::vector<ScoredRef> scored, std::size_t k);

/// Everything known about one source after evaluation in a layer.
struct ScoredSource {
    SourceRef source;
    FetchStatus status = FetchStatus::ok;
    std::size_t raw_token_count = 0;
    SourceScore score;
    std::optional<FilteredContent> filtered;
    std::vector<SourceRef> link_candidates;
    std::string error;

    [[nodiscard]] bool eligible() const {
        return status == FetchStatus::ok && error.empty() && filtered.has_value();
    }
};

/// Links surviving in the filtered content of `selected`, minus `visited`.
/// Adds every returned uri to `visited`. When two parents link the same new
/// uri, the first parent in `selected` order is recorded.
std::vector<SourceRef> discover_next(std::span<const ScoredSource> selected,
                                     std::set<std::string>& visited);

struct LayerStep {
    LayerRecord record;
    std::vector<ScoredSource> scored;
    KnowledgeContainer container;  // K_{l+1}, or K_l when terminated before fusion
    std::vector<SourceRef> next;
    bool terminated = false;
};

struct RunResult {
    KnowledgeContainer container;
    RunTrace trace;
};

class Engine {
public:
    Engine(EngineConfig config, ContentProvider& provider, ContentFilter& filter, Fusion& fusion);

    /// Throws ConfigError when `seeds` is empty.
    RunResult run(const Query& query, const std::vector<SourceRef>& seeds);

    /// Scores every source against `frozen`. `order` optionally permutes the
    /// evaluation order; results are always returned in `sources` order.
    std::vector<ScoredSource> evaluate_layer(const Query& query, std::span<const SourceRef> sources,
                                             const KnowledgeContainer& frozen,
                                             std::span<const std::size_t> order = {});

    LayerStep layer_step(const Query& query, int index, std::span<const SourceRef> sources,
                         const KnowledgeContainer& container, std::set<std::string>& visited,
                         std::span<const std::size_t> order = {});

    /// One progress line per layer goes here (nullptr silences it).
    void set_log(std::ostream* log) { log_ = log; }
    [[nodiscard]] const EngineConfig& config() const { return config_; }

private:
    ScoredSource evaluate_one(const Query& query, const SourceRef& source, const KnowledgeContainer& frozen);

    EngineConfig config_;
    ContentProvider& provider_;
    ContentFilter& filter_;
    Fusion& fusion_;
    std::ostream* log_ = nullptr;
};

}  // namespace wise
