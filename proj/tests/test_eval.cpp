#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "wise/eval.hpp"

using namespace wise;
namespace fs = std::filesystem;

namespace {

const fs::path kEval = fs::path(WISE_DATA_DIR) / "eval";

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = fs::temp_directory_path() / ("wise_" + std::to_string(::getpid()) + "_" + name);
        std::ofstream(path) << content;
    }
    ~TempFile() { fs::remove(path); }
};

SystemOutput sys(const std::string& name, const std::string& answer, std::vector<std::string> entities = {}) {
    return {name, answer, std::move(entities)};
}

}  // namespace

TEST_CASE("ROUGE on identical and disjoint texts") {
    const std::string t = "sickle cell disease is caused by hbb";
    for (int n : {1, 2}) {
        CHECK(rouge_n(t, t, n)->f1 == 1.0);
        CHECK(rouge_n(t, "alpha beta gamma delta", n)->f1 == 0.0);
    }
    CHECK(rouge_l(t, t)->f1 == 1.0);
    CHECK(rouge_l(t, "alpha beta gamma delta")->f1 == 0.0);
}

TEST_CASE("ROUGE-1 hand count") {
    const auto r = rouge_n("the cat sat", "the cat ran", 1);
    REQUIRE(r.has_value());
    CHECK(r->precision == doctest::Approx(2.0 / 3.0));
    CHECK(r->recall == doctest::Approx(2.0 / 3.0));
    CHECK(r->f1 == doctest::Approx(2.0 / 3.0));
    const auto r2 = rouge_n("the cat sat", "the cat ran", 2);
    CHECK(r2->precision == doctest::Approx(0.5));
}

TEST_CASE("ROUGE clips repeated n-grams") {
    const auto r = rouge_n("the the the", "the cat", 1);
    CHECK(r->precision == doctest::Approx(1.0 / 3.0));
    CHECK(r->recall == doctest::Approx(0.5));
}

TEST_CASE("ROUGE-L on reversed distinct tokens") {
    const auto r = rouge_l("e d c b a", "a b c d e");
    REQUIRE(r.has_value());
    CHECK(r->precision == doctest::Approx(0.2));
    CHECK(r->recall == doctest::Approx(0.2));
    CHECK(r->f1 == doctest::Approx(0.2));
    CHECK(rouge_l("a x b y c", "a b c")->recall == doctest::Approx(1.0));
}

TEST_CASE("empty reference is undefined") {
    CHECK_FALSE(rouge_n("a b", "", 1).has_value());
    CHECK_FALSE(rouge_n("a b", "single", 2).has_value());
    CHECK_FALSE(rouge_l("a b", "").has_value());
    CHECK_THROWS_AS(rouge_n("a", "a", 0), std::invalid_argument);
}

TEST_CASE("ROUGE F1 is swap invariant") {
    const std::string a = "hbb mutations cause sickle cell disease and thalassemia";
    const std::string b = "thalassemia and sickle cell anemia come from hbb variants";
    for (int n : {1, 2}) {
        const auto ab = *rouge_n(a, b, n), ba = *rouge_n(b, a, n);
        CHECK(ab.f1 == doctest::Approx(ba.f1));
        CHECK(ab.precision == doctest::Approx(ba.recall));
    }
    CHECK(rouge_l(a, b)->f1 == doctest::Approx(rouge_l(b, a)->f1));
}

TEST_CASE("BLEU identity, disjoint, empty") {
    CHECK(bleu("one two three four five", "one two three four five") == doctest::Approx(1.0));
    // Unigram precision is unsmoothed, so disjoint texts score exactly 0.
    CHECK(bleu("alpha beta gamma delta", "one two three four") == 0.0);
    CHECK(bleu("", "one two three") == 0.0);
}

TEST_CASE("BLEU brevity penalty on a 3 vs 6 token pair") {
    // Candidate is a prefix of the reference: p1 = 3/3, p2 = (2+1)/(2+1),
    // p3 = (1+1)/(1+1), p4 = (0+1)/(0+1); BP = e^(1 - 6/3).
    CHECK(bleu("a b c", "a b c d e f") == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("BLEU smoothing on higher orders") {
    // 4-token candidate, reference equal length: p1 = 2/4, p2 = (0+1)/(3+1),
    // p3 = (0+1)/(2+1), p4 = (0+1)/(1+1); BP = 1.
    const double want = std::exp((std::log(0.5) + std::log(0.25) + std::log(1.0 / 3.0) + std::log(0.5)) / 4.0);
    CHECK(bleu("a x b y", "a b c d") == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("name folding and canonicalization") {
    CHECK(fold_name("  Beta-Thalassemia ") == "beta-thalassemia");
    CHECK(fold_name("Β-Thalassemia") == fold_name("β-thalassemia"));
    ReferenceSet ref{{"β-Thalassemia"}, {{"beta-thalassemia", "β-Thalassemia"}}};
    CHECK(canonicalize("Beta-Thalassemia", ref) == "β-Thalassemia");
    CHECK(canonicalize("β-THALASSEMIA", ref) == "β-Thalassemia");
    CHECK(canonicalize("Unknown Disease", ref) == "Unknown Disease");
}

TEST_CASE("recall basics") {
    ReferenceSet ref{{"A", "B", "C", "D"}, {{"alpha", "A"}}};
    CHECK(*recall(sys("s", "", {"alpha", "B"}), ref) == 0.5);
    CHECK(*recall(sys("s", "", {"A", "B", "C", "D"}), ref) == 1.0);
    CHECK(*recall(sys("s", "", {"A", "A", "alpha"}), ref) == 0.25);
    CHECK_FALSE(recall(sys("s", "", {"A"}), ReferenceSet{}).has_value());

    double last = 0.0;
    std::vector<std::string> ents;
    for (const char* e : {"Z", "A", "B", "Y", "C", "D"}) {
        ents.emplace_back(e);
        const double r = *recall(sys("s", "", ents), ref);
        CHECK(r >= last);
        last = r;
    }
}

TEST_CASE("union reference: alias variants count once, order independent") {
    AliasTable aliases{{"beta-thalassemia", "β-Thalassemia"}};
    const auto a = sys("a", "", {"β-Thalassemia", "Sickle Cell Disease"});
    const auto b = sys("b", "", {"Beta-Thalassemia", "Malaria"});
    const auto u = union_reference({a, b}, aliases);
    CHECK(u.canonical.size() == 3);
    CHECK(union_reference({b, a}, aliases).canonical == u.canonical);
    CHECK(union_reference({a}, aliases).canonical.size() == 2);
    const auto again = union_reference({a, b, a, b}, aliases);
    CHECK(again.canonical == u.canonical);
}

TEST_CASE("level averages") {
    auto levels = [](std::initializer_list<int> ls) {
        std::vector<LevelAnnotation> v;
        for (int l : ls) v.push_back({"e" + std::to_string(v.size()), l, ""});
        return v;
    };
    CHECK(*level_average(levels({5, 5, 5})) == 5.0);
    CHECK(*level_average(levels({3, 4, 4, 5})) == 4.0);
    CHECK_FALSE(level_average({}).has_value());
    CHECK_THROWS_AS(level_average(levels({6})), std::invalid_argument);
    CHECK_THROWS_AS(level_average(levels({-1})), std::invalid_argument);
}

TEST_CASE("matrix: identical outputs and a disjoint outlier") {
    const auto same = cross_system_matrix({sys("a", "hbb gene causes sickle cell disease"),
                                           sys("b", "hbb gene causes sickle cell disease")});
    REQUIRE(same.size() == 2);
    for (const auto& r : same) {
        CHECK(r.rouge1 == doctest::Approx(1.0));
        CHECK(r.rouge2 == doctest::Approx(1.0));
        CHECK(r.rougeL == doctest::Approx(1.0));
        CHECK(r.bleu == doctest::Approx(1.0));
    }
    const auto rows = cross_system_matrix({sys("a", "hbb gene causes sickle cell disease in children"),
                                           sys("b", "hbb gene causes sickle cell anemia in adults"),
                                           sys("odd", "completely different words about weather")});
    const auto& odd = rows[2];
    CHECK(odd.reference_system == "odd");
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(odd.rouge1 < rows[i].rouge1);
        CHECK(odd.rougeL < rows[i].rougeL);
    }
    CHECK_THROWS_AS(cross_system_matrix({sys("only", "x")}), std::invalid_argument);
}

TEST_CASE("bundled fixtures: recall column") {
    const auto outputs = load_system_outputs(kEval / "systems");
    const auto reference = load_reference(kEval / "reference.json");
    CHECK(reference.canonical.size() == 19);
    CHECK(union_reference(outputs, reference.aliases).canonical.size() == 19);
    const std::map<std::string, double> want{{"WISE", 16.0 / 19}, {"ChatGPT", 9.0 / 19},
                                             {"ChatGPT with Search", 7.0 / 19}, {"Google Search Gemini", 2.0 / 19},
                                             {"Google Search", 3.0 / 19}};
    REQUIRE(outputs.size() == 5);
    for (const auto& o : outputs) {
        REQUIRE(want.count(o.system) == 1);
        CHECK_MESSAGE(*recall(o, reference) == doctest::Approx(want.at(o.system)).epsilon(1e-9), o.system);
    }
}

TEST_CASE("bundled fixtures: WISE has the lowest matrix row") {
    const auto rows = cross_system_matrix(load_system_outputs(kEval / "systems"));
    const auto wise = std::find_if(rows.begin(), rows.end(), [](const MatrixRow& r) { return r.reference_system == "WISE"; });
    REQUIRE(wise != rows.end());
    for (const auto& r : rows) {
        if (&r == &*wise) continue;
        CHECK(wise->rouge1 < r.rouge1);
        CHECK(wise->rouge2 < r.rouge2);
        CHECK(wise->rougeL < r.rougeL);
        CHECK(wise->bleu < r.bleu);
    }
}

TEST_CASE("bundled fixtures: level averages") {
    const auto wise = load_levels(kEval / "levels" / "wise.json");
    CHECK(wise.system == "WISE");
    CHECK(*level_average(wise.annotations) == doctest::Approx(3.8).epsilon(0.05 / 3.8));
    CHECK(*level_average(load_levels(kEval / "levels" / "chatgpt.json").annotations) ==
          doctest::Approx(3.33).epsilon(0.01));
    CHECK(*level_average(load_levels(kEval / "levels" / "gemini.json").annotations) == doctest::Approx(2.5));
    CHECK(*level_average(load_levels(kEval / "levels" / "google.json").annotations) == doctest::Approx(3.0));
}

TEST_CASE("fixture errors carry file and line") {
    TempFile broken("broken.json", "{\n  \"system\": \"x\",\n  \"answer\": \n}\n");
    try {
        load_system_output(broken.path);
        FAIL("expected FixtureError");
    } catch (const FixtureError& e) {
        CHECK(std::string(e.what()).find(broken.path.string() + ":") == 0);
        CHECK(e.line() == 4);
    }

    TempFile no_entities("noent.json", R"({"system": "x", "answer": "y"})");
    CHECK_THROWS_AS(load_system_output(no_entities.path), FixtureError);

    TempFile bad_alias("alias.json", R"({"canonical": ["A"], "aliases": {"a2": "Missing"}})");
    CHECK_THROWS_AS(load_reference(bad_alias.path), FixtureError);

    TempFile dup("dup.json", R"({"canonical": ["A", "a"], "aliases": {}})");
    CHECK_THROWS_AS(load_reference(dup.path), FixtureError);

    TempFile bad_level("level.json", "[\n  {\"entity\": \"A\", \"level\": 2},\n  {\"entity\": \"B\", \"level\": 9}\n]\n");
    try {
        load_levels(bad_level.path);
        FAIL("expected FixtureError");
    } catch (const FixtureError& e) {
        CHECK(e.line() == 3);
    }

    TempFile bare("bare_levels.json", R"([{"entity": "A", "level": 2, "justification": "j"}])");
    CHECK(load_levels(bare.path).system == bare.path.stem().string());
    CHECK_THROWS_AS(load_system_outputs("/no/such/dir"), FixtureError);
}
