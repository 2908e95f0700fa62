#include <doctest.h>

#include <cmath>
#include <limits>

#include "wise/fetch.hpp"
#include "wise/serialize.hpp"

using namespace wise;

TEST_CASE("query requires text") {
    CHECK_THROWS_AS(Query::make("   "), ConfigError);
    const auto q = Query::make("HBB diseases", "q1");
    CHECK(q.text == "HBB diseases");
    CHECK(q.id == "q1");
}

TEST_CASE("enum strings round-trip") {
    for (auto s : {FetchStatus::ok, FetchStatus::blocked, FetchStatus::paywalled, FetchStatus::network_error,
                   FetchStatus::not_found}) {
        CHECK(fetch_status_from_string(to_string(s)) == s);
    }
    for (auto r : {TerminationReason::threshold, TerminationReason::exhausted, TerminationReason::max_layers}) {
        CHECK(termination_reason_from_string(to_string(r)) == r);
    }
    CHECK(filter_mode_from_string("llm") == FilterMode::llm);
    CHECK(stopword_policy_from_string("none") == StopwordPolicy::none);
    CHECK_THROWS(filter_mode_from_string("fuzzy"));
}

TEST_CASE("engine config: partial files, unknown keys, infinite threshold") {
    const auto c = json::parse(R"({"threshold": 5, "top_k": 3})").get<EngineConfig>();
    CHECK(c.threshold == 5.0);
    CHECK(c.top_k == 3);
    CHECK(c.max_layers == 8);

    EngineConfig inf;
    inf.threshold = std::numeric_limits<double>::infinity();
    const json j = inf;
    CHECK(std::isinf(j.get<EngineConfig>().threshold));

    CHECK_THROWS_AS(json::parse(R"({"threshhold": 5})").get<EngineConfig>(), ConfigError);
}

TEST_CASE("raw content round-trip") {
    RawContent r = make_raw_content({"https://x.org/a", "https://x.org/", 2, "anchor", TextSpan{3, 6}},
                                    "<h1>Title</h1><p>Body <a href=\"b\">b</a></p>", "text/html", 12345);
    const json j = r;
    CHECK(j.get<RawContent>() == r);
    CHECK(dump_pretty(j).back() == '\n');
}

TEST_CASE("container tokens serialize sorted") {
    KnowledgeContainer k;
    k.tokens = {"zeta", "alpha", "β"};
    k.segments.push_back({"text", "https://x.org/", 1});
    k.policy_fingerprint = "fp";
    const json j = k;
    CHECK(j["tokens"] == json::array({"alpha", "zeta", "β"}));
    const auto back = j.get<KnowledgeContainer>();
    CHECK(back.tokens == k.tokens);
    CHECK(back.segments == k.segments);
}

TEST_CASE("run trace round-trip is byte stable") {
    RunTrace t;
    t.query = Query::make("q", "id");
    LayerRecord l;
    l.index = 0;
    SourceOutcome o;
    o.source = {"https://x.org/"};
    o.score.word_count = 3;
    o.score.unique_contribution = 3;
    o.score.combined = 3.0 / std::log(4.0);
    l.sources.push_back(o);
    l.selected = {"https://x.org/"};
    l.max_score = o.score.combined;
    l.termination_reason = TerminationReason::threshold;
    t.layers.push_back(l);
    const std::string once = dump_pretty(t);
    CHECK(dump_pretty(json::parse(once).get<RunTrace>()) == once);
}
