#include "wise/engine.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <thread>

#include "wise/score.hpp"

namespace wise {

KnowledgeContainer empty_container(const TokenPolicy& policy) {
    KnowledgeContainer k;
    k.policy_fingerprint = policy.fingerprint();
    return k;
}

KnowledgeContainer merge_default(const KnowledgeContainer& current, std::span<const FilteredContent> selected) {
    KnowledgeContainer next = current;
    std::set<std::string, std::less<>> present;
    for (const auto& seg : current.segments) present.insert(seg.text);

    for (const auto& f : selected) {
        if (f.policy_fingerprint != current.policy_fingerprint) {
            throw PolicyMismatch("cannot merge " + f.source.uri + ": token policy differs from container");
        }
        for (const auto& seg : f.segments) {
            for (auto& sentence : split_sentences(seg.text)) {
                if (!present.insert(sentence.text).second) continue;
                next.segments.push_back({std::move(sentence.text), f.source.uri, f.source.layer});
            }
        }
        next.tokens.insert(f.tokens.begin(), f.tokens.end());
    }
    return next;
}

std::vector<ScoredRef> select_top_k(std::vector<ScoredRef> scored, std::size_t k) {
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredRef& a, const ScoredRef& b) {
        if (a.score.combined != b.score.combined) return a.score.combined > b.score.combined;
        if (a.score.unique_contribution != b.score.unique_contribution) {
            return a.score.unique_contribution > b.score.unique_contribution;
        }
        return a.source.uri < b.source.uri;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::vector<SourceRef> discover_next(std::span<const ScoredSource> selected, std::set<std::string>& visited) {
    std::vector<SourceRef> next;
    for (const auto& s : selected) {
        if (!s.filtered) continue;
        for (auto link : extract_links(*s.filtered, s.link_candidates)) {
            if (!visited.insert(link.uri).second) continue;
            link.parent = s.source.uri;
            link.layer = s.source.layer + 1;
            next.push_back(std::move(link));
        }
    }
    return next;
}

Engine::Engine(EngineConfig config, ContentProvider& provider, ContentFilter& filter, Fusion& fusion)
    : config_(std::move(config)), provider_(provider), filter_(filter), fusion_(fusion) {
    config_.validate();
}

ScoredSource Engine::evaluate_one(const Query& query, const SourceRef& source, const KnowledgeContainer& frozen) {
    ScoredSource out;
    out.source = source;
    RawContent raw;
    try {
        raw = provider_.resolve(source);
    } catch (const std::exception& e) {
        out.status = FetchStatus::network_error;
        out.error = e.what();
        return out;
    }
    out.status = raw.status;
    if (raw.status != FetchStatus::ok) {
        out.error = raw.detail.empty() ? std::string(to_string(raw.status)) : raw.detail;
        return out;
    }
    out.raw_token_count = token_set(raw.text, filter_.policy()).size();
    out.link_candidates = extract_links(raw);
    try {
        FilteredContent f = filter_.filter(query, raw);
        f.source = source;
        out.score = score_source(f, frozen);
        out.filtered = std::move(f);
    } catch (const PolicyMismatch&) {
        throw;
    } catch (const std::exception& e) {
        // Filter failure: the source contributes nothing this run.
        out.error = e.what();
        out.score = SourceScore{};
    }
    return out;
}

std::vector<ScoredSource> Engine::evaluate_layer(const Query& query, std::span<const SourceRef> sources,
                                                 const KnowledgeContainer& frozen,
                                                 std::span<const std::size_t> order) {
    std::vector<std::size_t> sequence(sources.size());
    if (order.empty()) {
        std::iota(sequence.begin(), sequence.end(), std::size_t{0});
    } else {
        if (order.size() != sources.size()) throw std::invalid_argument("evaluation order has wrong length");
        sequence.assign(order.begin(), order.end());
    }

    std::vector<ScoredSource> results(sources.size());
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t n; (n = cursor.fetch_add(1)) < sequence.size();) {
            const std::size_t idx = sequence[n];
            try {
                results[idx] = evaluate_one(query, sources[idx], frozen);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config_.max_in_flight), sources.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

LayerStep Engine::layer_step(const Query& query, int index, std::span<const SourceRef> sources,
                             const KnowledgeContainer& container, std::set<std::string>& visited,
                             std::span<const std::size_t> order) {
    LayerStep step;
    step.record.index = index;
    step.record.container_before = container.size();
    step.record.container_after = container.size();
    step.container = container;

    auto stop = [&](TerminationReason reason) {
        step.record.termination_reason = reason;
        step.terminated = true;
        return step;
    };

    if (sources.empty()) return stop(TerminationReason::exhausted);

    step.scored = evaluate_layer(query, sources, container, order);
    std::vector<ScoredRef> candidates;
    for (const auto& s : step.scored) {
        step.record.sources.push_back(SourceOutcome{s.source, s.status, s.raw_token_count, s.score,
                                                    s.filtered ? s.filtered->verbatim_fraction : std::nullopt,
                                                    s.error});
        if (s.eligible()) candidates.push_back({s.source, s.score});
    }
    if (candidates.empty()) return stop(TerminationReason::exhausted);

    double best = 0.0;
    for (const auto& c : candidates) best = std::max(best, c.score.combined);
    step.record.max_score = best;
    if (best < config_.threshold) return stop(TerminationReason::threshold);

    const auto chosen = select_top_k(std::move(candidates), static_cast<std::size_t>(config_.top_k));
    std::vector<ScoredSource> selected;
    std::vector<FilteredContent> selected_content;
    for (const auto& c : chosen) {
        auto it = std::find_if(step.scored.begin(), step.scored.end(),
                               [&](const ScoredSource& s) { return s.source.uri == c.source.uri; });
        selected.push_back(*it);
        selected_content.push_back(*it->filtered);
        step.record.selected.push_back(c.source.uri);
    }

    step.container = fusion_.merge(container, selected_content);
    if (!std::includes(step.container.tokens.begin(), step.container.tokens.end(), container.tokens.begin(),
                       container.tokens.end())) {
        throw std::logic_error("fusion removed tokens from the knowledge container");
    }
    step.record.container_after = step.container.size();

    step.next = discover_next(selected, visited);
    if (step.next.empty()) return stop(TerminationReason::exhausted);
    if (index + 1 >= config_.max_layers) return stop(TerminationReason::max_layers);
    return step;
}

RunResult Engine::run(const Query& query, const std::vector<SourceRef>& seeds) {
    if (seeds.empty()) throw ConfigError("no seed sources");

    RunResult result;
    result.trace.query = query;
    result.trace.config = config_;
    KnowledgeContainer container = empty_container(filter_.policy());

    std::set<std::string> visited;
    std::vector<SourceRef> layer;
    for (auto s : seeds) {
        if (!visited.insert(s.uri).second) continue;
        s.layer = 0;
        s.parent.reset();
        layer.push_back(std::move(s));
    }

    for (int index = 0;; ++index) {
        LayerStep step = layer_step(query, index, layer, container, visited);
        if (log_) {
            *log_ << "layer " << index << ": sources=" << step.record.sources.size() << " max_score=";
            if (step.record.max_score) {
                *log_ << std::fixed << std::setprecision(4) << *step.record.max_score << std::defaultfloat;
            } else {
                *log_ << "-";
            }
            *log_ << " container=" << step.record.container_before << "->" << step.record.container_after
                  << " selected=" << step.record.selected.size();
            if (step.record.termination_reason) *log_ << " stop=" << to_string(*step.record.termination_reason);
            *log_ << "\n";
        }
        container = std::move(step.container);
        result.trace.layers.push_back(std::move(step.record));
        if (step.terminated) break;
        layer = std::move(step.next);
    }
    result.container = std::move(container);
    return result;
}

}  // namespace wise
