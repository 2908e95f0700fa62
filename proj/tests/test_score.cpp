#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wise/score.hpp"
#include "wise/tokenize.hpp"

using namespace wise;

namespace {

TokenSet ts(std::initializer_list<const char*> items) {
    TokenSet s;
    for (const char* i : items) s.emplace(i);
    return s;
}

// Brute force over vectors so the oracle shares no code with std::set paths.
struct Oracle {
    std::size_t overlap = 0, unique = 0;
    double density = 0.0;
    std::optional<double> increase;
    double combined = 0.0;
};

Oracle oracle(const std::vector<std::string>& f, const std::vector<std::string>& k) {
    Oracle o;
    for (const auto& a : f) {
        bool hit = false;
        for (const auto& b : k) hit = hit || a == b;
        if (hit) ++o.overlap; else ++o.unique;
    }
    o.density = f.empty() ? 0.0 : static_cast<double>(o.unique) / static_cast<double>(f.size());
    if (!k.empty()) o.increase = static_cast<double>(o.unique) / static_cast<double>(k.size());
    o.combined = o.unique == 0 ? 0.0
                               : static_cast<double>(o.unique) /
                                     std::log(1.0 + static_cast<double>(f.size()) + static_cast<double>(k.size()));
    return o;
}

std::vector<std::string> sample(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < vocab; ++i) pool.push_back("t" + std::to_string(i));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(n, vocab));
    return pool;
}

bool close_rel(double a, double b) {
    if (a == b) return true;
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("overlap examples") {
    CHECK(score::overlap(ts({"a", "b", "c"}), {}) == 0);
    CHECK(score::overlap(ts({"a", "b"}), ts({"a", "b"})) == 2);
    CHECK(score::overlap(ts({"a", "b", "c", "d"}), ts({"b", "d", "e"})) == 2);
}

TEST_CASE("unique contribution examples") {
    CHECK(score::unique_contribution(ts({"a", "b", "c"}), {}) == 3);
    CHECK(score::unique_contribution(ts({"a", "b"}), ts({"a", "b", "z"})) == 0);
    CHECK(score::unique_contribution(ts({"a", "b", "c", "d"}), ts({"b", "d", "e"})) == 2);
}

TEST_CASE("density examples") {
    CHECK(score::knowledge_density(ts({"a", "b", "c"}), {}) == 1.0);
    CHECK(score::knowledge_density(ts({"a", "b"}), ts({"a", "b"})) == 0.0);
    CHECK(score::knowledge_density(ts({"a", "b", "c", "d"}), ts({"b", "d", "e"})) == 0.5);
    CHECK(score::knowledge_density({}, ts({"a"})) == 0.0);
}

TEST_CASE("increase examples") {
    CHECK(score::knowledge_increase(ts({"a", "b"}), ts({"x", "y", "z", "w"})) == 0.5);
    CHECK(score::knowledge_increase(ts({"a"}), ts({"a"})) == 0.0);
    CHECK_FALSE(score::knowledge_increase(ts({"a", "b"}), {}).has_value());
}

TEST_CASE("combined examples") {
    CHECK(score::combined_score(ts({"a", "b", "c"}), {}) == doctest::Approx(2.1640).epsilon(1e-4));
    CHECK(score::combined_score(ts({"a", "b", "c"}), {}) == 3.0 / std::log(4.0));
    CHECK(score::combined_score(ts({"a", "b"}), ts({"a", "b"})) == 0.0);
    CHECK(score::combined_score({}, {}) == 0.0);
    CHECK(score::combined_from_counts(30, 50, 200) == doctest::Approx(5.4299).epsilon(1e-4));
}

TEST_CASE("scoring matches a brute-force oracle on random pairs") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t vocab = 1 + rng() % 80;
        const auto f = sample(rng, rng() % 51, vocab);
        const auto k = sample(rng, rng() % 51, vocab);
        const TokenSet fs(f.begin(), f.end()), ks(k.begin(), k.end());
        const auto want = oracle(f, k);
        const auto got = score::evaluate(fs, ks);
        REQUIRE(got.overlap == want.overlap);
        REQUIRE(got.unique_contribution == want.unique);
        REQUIRE(got.word_count == f.size());
        REQUIRE(got.density == want.density);
        REQUIRE(got.increase.has_value() == want.increase.has_value());
        if (want.increase) REQUIRE(*got.increase == *want.increase);
        REQUIRE(close_rel(got.combined, want.combined));
        REQUIRE(got.overlap <= std::min(fs.size(), ks.size()));
        REQUIRE((got.combined == 0.0) == (got.unique_contribution == 0));
    }
}

TEST_CASE("combined is strictly increasing in the unique count") {
    for (std::size_t w = 1; w <= 40; ++w) {
        for (std::size_t u = 1; u <= w; ++u) {
            CHECK(score::combined_from_counts(u, w, 100) > score::combined_from_counts(u - 1, w, 100));
        }
    }
}

TEST_CASE("growing K with disjoint tokens lowers combined only") {
    const TokenSet f = ts({"a", "b", "c"});
    TokenSet k = ts({"a"});
    const auto before = score::evaluate(f, k);
    k.insert("zz1");
    k.insert("zz2");
    const auto after = score::evaluate(f, k);
    CHECK(after.unique_contribution == before.unique_contribution);
    CHECK(after.combined < before.combined);
}

TEST_CASE("policy mismatch is a contract violation") {
    const auto p = TokenPolicy::scoring();
    FilteredContent f;
    f.tokens = ts({"a"});
    f.policy_fingerprint = p.fingerprint();
    KnowledgeContainer k;
    k.policy_fingerprint = TokenPolicy::metric().fingerprint();
    CHECK_THROWS_AS(score_source(f, k), PolicyMismatch);
    k.policy_fingerprint = p.fingerprint();
    CHECK(score_source(f, k).unique_contribution == 1);
}
