#include "wise/serialize.hpp"

#include <cmath>
#include <limits>

namespace wise {

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        out.reset();
    } else {
        out = it->template get<T>();
    }
}

// JSON has no infinity; an unbounded threshold round-trips as "inf".
json finite_or_tag(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

double number_or_tag(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw ConfigError("expected number, got '" + s + "'");
    }
    return j.get<double>();
}

}  // namespace

void to_json(json& j, const Query& q) { j = json{{"id", q.id}, {"text", q.text}}; }
void from_json(const json& j, Query& q) {
    q.id = j.value("id", std::string{});
    q.text = j.at("text").get<std::string>();
}

void to_json(json& j, const TextSpan& s) { j = json{{"offset", s.offset}, {"length", s.length}}; }
void from_json(const json& j, TextSpan& s) {
    s.offset = j.at("offset").get<std::size_t>();
    s.length = j.at("length").get<std::size_t>();
}

void to_json(json& j, const SourceRef& s) {
    j = json{{"uri", s.uri},
             {"parent", opt(s.parent)},
             {"layer", s.layer},
             {"anchor_text", opt(s.anchor_text)},
             {"anchor_span", opt(s.anchor_span)}};
}
void from_json(const json& j, SourceRef& s) {
    s.uri = j.at("uri").get<std::string>();
    get_opt(j, "parent", s.parent);
    s.layer = j.value("layer", 0);
    get_opt(j, "anchor_text", s.anchor_text);
    get_opt(j, "anchor_span", s.anchor_span);
}

void to_json(json& j, const Section& s) { j = json{{"id", s.id}, {"text", s.text}}; }
void from_json(const json& j, Section& s) {
    s.id = j.at("id").get<std::string>();
    s.text = j.at("text").get<std::string>();
}

void to_json(json& j, const RawContent& r) {
    j = json{{"source", r.source},       {"text", r.text},
             {"links", r.links},         {"sections", r.sections},
             {"fetched_at", r.fetched_at}, {"status", to_string(r.status)},
             {"detail", r.detail}};
}
void from_json(const json& j, RawContent& r) {
    r.source = j.at("source").get<SourceRef>();
    r.text = j.at("text").get<std::string>();
    r.links = j.at("links").get<std::vector<SourceRef>>();
    r.sections = j.at("sections").get<std::vector<Section>>();
    r.fetched_at = j.value("fetched_at", std::int64_t{0});
    r.status = fetch_status_from_string(j.at("status").get<std::string>());
    r.detail = j.value("detail", std::string{});
}

void to_json(json& j, const Segment& s) { j = json{{"text", s.text}, {"offset", opt(s.offset)}}; }
void from_json(const json& j, Segment& s) {
    s.text = j.at("text").get<std::string>();
    get_opt(j, "offset", s.offset);
}

void to_json(json& j, const FilteredContent& f) {
    j = json{{"source", f.source},
             {"segments", f.segments},
             {"tokens", f.tokens},
             {"word_count", f.word_count()},
             {"policy_fingerprint", f.policy_fingerprint},
             {"verbatim_fraction", opt(f.verbatim_fraction)}};
}

void to_json(json& j, const ContainerSegment& s) {
    j = json{{"text", s.text}, {"source", s.source_uri}, {"layer", s.layer}};
}
void from_json(const json& j, ContainerSegment& s) {
    s.text = j.at("text").get<std::string>();
    s.source_uri = j.at("source").get<std::string>();
    s.layer = j.at("layer").get<int>();
}

void to_json(json& j, const KnowledgeContainer& k) {
    j = json{{"tokens", k.tokens},
             {"segments", k.segments},
             {"size", k.size()},
             {"policy_fingerprint", k.policy_fingerprint}};
}
void from_json(const json& j, KnowledgeContainer& k) {
    k.tokens.clear();
    for (const auto& t : j.at("tokens")) k.tokens.insert(t.get<std::string>());
    k.segments = j.at("segments").get<std::vector<ContainerSegment>>();
    k.policy_fingerprint = j.value("policy_fingerprint", std::string{});
}

void to_json(json& j, const SourceScore& s) {
    j = json{{"word_count", s.word_count},
             {"overlap", s.overlap},
             {"unique_contribution", s.unique_contribution},
             {"density", s.density},
             {"increase", opt(s.increase)},
             {"combined", s.combined}};
}
void from_json(const json& j, SourceScore& s) {
    s.word_count = j.at("word_count").get<std::size_t>();
    s.overlap = j.at("overlap").get<std::size_t>();
    s.unique_contribution = j.at("unique_contribution").get<std::size_t>();
    s.density = j.at("density").get<double>();
    get_opt(j, "increase", s.increase);
    s.combined = j.at("combined").get<double>();
}

void to_json(json& j, const EngineConfig& c) {
    j = json{{"threshold", finite_or_tag(c.threshold)},
             {"top_k", c.top_k},
             {"max_layers", c.max_layers},
             {"filter_mode", to_string(c.filter_mode)},
             {"stopword_policy", to_string(c.stopword_policy)},
             {"stopword_file", c.stopword_file},
             {"random_seed", c.random_seed},
             {"politeness_delay_ms", c.politeness_delay.count()},
             {"cache_dir", c.cache_dir},
             {"max_in_flight", c.max_in_flight}};
}
void from_json(const json& j, EngineConfig& c) {
    if (!j.is_object()) throw ConfigError("engine config must be a JSON object");
    static const std::set<std::string> known{
        "threshold",     "top_k",       "max_layers",          "filter_mode",
        "stopword_policy", "stopword_file", "random_seed",     "politeness_delay_ms",
        "cache_dir",     "max_in_flight"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    try {
        if (j.contains("threshold")) c.threshold = number_or_tag(j.at("threshold"));
        if (j.contains("top_k")) c.top_k = j.at("top_k").get<int>();
        if (j.contains("max_layers")) c.max_layers = j.at("max_layers").get<int>();
        if (j.contains("filter_mode")) {
            c.filter_mode = filter_mode_from_string(j.at("filter_mode").get<std::string>());
        }
        if (j.contains("stopword_policy")) {
            c.stopword_policy =
                stopword_policy_from_string(j.at("stopword_policy").get<std::string>());
        }
        if (j.contains("stopword_file")) c.stopword_file = j.at("stopword_file").get<std::string>();
        if (j.contains("random_seed")) c.random_seed = j.at("random_seed").get<std::uint64_t>();
        if (j.contains("politeness_delay_ms")) {
            c.politeness_delay = std::chrono::milliseconds(j.at("politeness_delay_ms").get<long>());
        }
        if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
        if (j.contains("max_in_flight")) c.max_in_flight = j.at("max_in_flight").get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

void to_json(json& j, const SourceOutcome& o) {
    j = json{{"source", o.source},
             {"status", to_string(o.status)},
             {"raw_token_count", o.raw_token_count},
             {"score", o.score},
             {"verbatim_fraction", opt(o.verbatim_fraction)},
             {"error", o.error}};
}
void from_json(const json& j, SourceOutcome& o) {
    o.source = j.at("source").get<SourceRef>();
    o.status = fetch_status_from_string(j.at("status").get<std::string>());
    o.raw_token_count = j.at("raw_token_count").get<std::size_t>();
    o.score = j.at("score").get<SourceScore>();
    get_opt(j, "verbatim_fraction", o.verbatim_fraction);
    o.error = j.value("error", std::string{});
}

void to_json(json& j, const LayerRecord& l) {
    j = json{{"index", l.index},
             {"sources", l.sources},
             {"selected", l.selected},
             {"container_before", l.container_before},
             {"container_after", l.container_after},
             {"max_score", opt(l.max_score)},
             {"termination_reason",
              l.termination_reason ? json(to_string(*l.termination_reason)) : json(nullptr)}};
}
void from_json(const json& j, LayerRecord& l) {
    l.index = j.at("index").get<int>();
    l.sources = j.at("sources").get<std::vector<SourceOutcome>>();
    l.selected = j.at("selected").get<std::vector<std::string>>();
    l.container_before = j.at("container_before").get<std::size_t>();
    l.container_after = j.at("container_after").get<std::size_t>();
    get_opt(j, "max_score", l.max_score);
    const auto& tr = j.at("termination_reason");
    if (tr.is_null()) {
        l.termination_reason.reset();
    } else {
        l.termination_reason = termination_reason_from_string(tr.get<std::string>());
    }
}

void to_json(json& j, const RunTrace& t) {
    j = json{{"query", t.query}, {"config", t.config}, {"layers", t.layers}};
}
void from_json(const json& j, RunTrace& t) {
    t.query = j.at("query").get<Query>();
    t.config = EngineConfig{};
    from_json(j.at("config"), t.config);
    t.layers = j.at("layers").get<std::vector<LayerRecord>>();
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

}  // namespace wise
