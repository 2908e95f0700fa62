#include <doctest.h>

#include <cmath>
#include <limits>

#include "wise/engine.hpp"
#include "wise/serialize.hpp"
#include "wise/sim.hpp"
#include "wise/tokenize.hpp"

using namespace wise;

namespace {

struct SimRun {
    RunResult result;
    SimMeasurement m;
};

SimRun run_sim(const CorpusManifest& manifest, double threshold, int max_layers = 8, int k = 2) {
    EngineConfig c;
    c.threshold = threshold;
    c.max_layers = max_layers;
    c.top_k = k;
    SimProvider provider(manifest);
    ExtractiveFilter filter(TokenPolicy::scoring());
    UnionFusion fusion;
    Engine engine(c, provider, filter, fusion);
    SimRun r;
    r.result = engine.run(Query::make(manifest.spec.query), provider.roots());
    r.m = measure(r.result.trace, r.result.container, manifest);
    return r;
}

}  // namespace

TEST_CASE("single-document corpus") {
    CorpusSpec s;
    s.depth = 1;
    s.branching = 0;
    s.docs_per_layer = 1;
    s.noise_ratio = 0.0;
    const auto m = generate(s);
    REQUIRE(m.documents.size() == 1);
    CHECK(m.documents[0].links.empty());
    CHECK(m.documents[0].noise_sentence_count == 0);
}

TEST_CASE("layer sizes and link layering") {
    const auto m = generate(acceptance_spec());
    CHECK(m.documents.size() == 5 + 25 + 125);
    for (const auto& d : m.documents) {
        if (d.layer < m.spec.depth - 1) {
            CHECK(d.links.size() == static_cast<std::size_t>(m.spec.branching));
        } else {
            CHECK(d.links.empty());
        }
        for (const auto& l : d.links) {
            const auto* child = m.find(l.uri);
            REQUIRE(child != nullptr);
            CHECK(child->layer == d.layer + 1);
            CHECK(d.text.substr(l.anchor_span.offset, l.anchor_span.length) == l.anchor_text);
        }
    }
    CHECK(sim_uri(1, 7) == "sim://doc/L1/7");
}

TEST_CASE("noise share is exact and noise shares no token with the query") {
    const auto m = generate(acceptance_spec());
    const auto policy = TokenPolicy::scoring();
    const auto q = token_set(m.spec.query, policy);
    for (const auto& d : m.documents) {
        CHECK(d.sentence_count == m.spec.sentences_per_doc);
        CHECK(d.noise_sentence_count == 16);
    }
    // Sentences the extractive filter drops are exactly the noise ones.
    ExtractiveFilter filter(policy);
    SimProvider provider(m);
    for (const auto& root : provider.roots()) {
        const auto raw = provider.resolve(root);
        const auto all = split_sentences(raw.text);
        const auto kept = filter.filter(Query::make(m.spec.query), raw).segments;
        CHECK(all.size() - kept.size() == 16);
        for (const auto& s : all) {
            const auto toks = token_set(s.text, policy);
            const bool relevant = std::any_of(toks.begin(), toks.end(), [&](const auto& t) { return q.count(t); });
            const bool was_kept =
                std::any_of(kept.begin(), kept.end(), [&](const Segment& k) { return k.text == s.text; });
            CHECK(relevant == was_kept);
        }
    }
}

TEST_CASE("facts are planted and unique") {
    const auto m = generate(acceptance_spec());
    REQUIRE(m.facts.size() == m.spec.facts.size());
    for (const auto& f : m.facts) {
        const auto* d = m.find(f.document);
        REQUIRE(d != nullptr);
        CHECK(d->text.find(f.sentence) != std::string::npos);
        CHECK(std::find(d->facts.begin(), d->facts.end(), f.id) != d->facts.end());
        std::size_t holders = 0;
        for (const auto& doc : m.documents) holders += doc.text.find(f.sentence) != std::string::npos ? 1 : 0;
        CHECK(holders >= 1);
    }
}

TEST_CASE("same seed, same manifest; different seed, different text") {
    const auto a = dump_pretty(generate(acceptance_spec()));
    CHECK(a == dump_pretty(generate(acceptance_spec())));
    auto other = acceptance_spec();
    other.seed = 43;
    CHECK(a != dump_pretty(generate(other)));
}

TEST_CASE("manifest JSON round-trip") {
    const auto m = generate(acceptance_spec());
    const json j = m;
    const auto back = j.get<CorpusManifest>();
    CHECK(dump_pretty(back) == dump_pretty(m));
    json bad = json(acceptance_spec());
    bad["unexpected"] = 1;
    CHECK_THROWS_AS(bad.get<CorpusSpec>(), ConfigError);
}

TEST_CASE("spec validation") {
    auto s = acceptance_spec();
    s.facts.push_back({"deep", "", 3, 0});
    CHECK_THROWS_AS(generate(s), ConfigError);
    s = acceptance_spec();
    s.noise_ratio = 1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = acceptance_spec();
    s.overlap_ratio = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = acceptance_spec();
    s.depth = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = acceptance_spec();
    s.facts.push_back(s.facts.front());
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("provider: roots, leaves, unknown ids") {
    const auto m = generate(acceptance_spec());
    SimProvider p(m);
    const auto roots = p.roots();
    REQUIRE(roots.size() == 5);
    const auto root = p.resolve(roots[0]);
    CHECK(root.status == FetchStatus::ok);
    CHECK(root.links.size() == 5);
    const auto leaf = p.resolve({sim_uri(2, 0)});
    CHECK(leaf.status == FetchStatus::ok);
    CHECK(leaf.links.empty());
    CHECK(p.resolve({"sim://doc/L9/0"}).status == FetchStatus::not_found);
}

TEST_CASE("acceptance corpus: decay, threshold stop, recall, reduction") {
    const auto m = generate(acceptance_spec());
    const auto r = run_sim(m, kAcceptanceThreshold);
    const auto& layers = r.result.trace.layers;
    REQUIRE(layers.size() >= 2);
    for (std::size_t i = 1; i < layers.size(); ++i) {
        CHECK(*layers[i].max_score < *layers[i - 1].max_score);
    }
    CHECK(layers.back().termination_reason == TerminationReason::threshold);
    CHECK(static_cast<int>(layers.size()) < r.result.trace.config.max_layers);
    CHECK(r.m.fact_recall >= 0.9);
    REQUIRE(r.m.filtered_volume_reduction.has_value());
    CHECK(*r.m.filtered_volume_reduction >= 0.75);
    CHECK(r.m.processed_text_fraction < 0.5);
}

TEST_CASE("infinite threshold explores one layer and keeps nothing") {
    const auto m = generate(acceptance_spec());
    const auto r = run_sim(m, std::numeric_limits<double>::infinity());
    CHECK(r.m.layers_explored == 1);
    CHECK(r.result.container.tokens.empty());
}

TEST_CASE("zero threshold with max_layers = depth reaches every reachable fact") {
    const auto m = generate(acceptance_spec());
    const auto r = run_sim(m, 0.0, m.spec.depth);
    CHECK(r.m.fact_recall == 1.0);
    CHECK(r.m.layers_explored <= m.spec.depth);
}

TEST_CASE("full repetition stops at layer 1") {
    auto s = acceptance_spec();
    s.overlap_ratio = 1.0;
    s.fact_path_richness = 0;
    s.facts.clear();
    const auto r = run_sim(generate(s), kAcceptanceThreshold);
    REQUIRE(r.result.trace.layers.size() == 2);
    CHECK(r.result.trace.layers[1].termination_reason == TerminationReason::threshold);
}

TEST_CASE("more overlap never stops later") {
    int last = std::numeric_limits<int>::max();
    for (double o : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        auto s = acceptance_spec();
        s.overlap_ratio = o;
        const int layers = static_cast<int>(run_sim(generate(s), kAcceptanceThreshold).result.trace.layers.size());
        CHECK_MESSAGE(layers <= last, "overlap " << o);
        last = layers;
    }
}

TEST_CASE("fact recall is monotone in max_layers and T") {
    const auto m = generate(acceptance_spec());
    double prev = 0.0;
    for (int ml = 1; ml <= 4; ++ml) {
        const double r = run_sim(m, kAcceptanceThreshold, ml).m.fact_recall;
        CHECK(r >= prev);
        prev = r;
    }
    prev = 1.0;
    for (double t : {0.0, 1.0, 2.0, 5.0, 12.0, 100.0}) {
        const double r = run_sim(m, t).m.fact_recall;
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("measure rejects a trace from another corpus") {
    const auto m = generate(acceptance_spec());
    auto r = run_sim(m, kAcceptanceThreshold);
    r.result.trace.layers[0].sources[0].source.uri = "sim://doc/L7/999";
    CHECK_THROWS_AS(measure(r.result.trace, r.result.container, m), std::invalid_argument);
}
