#include "wise/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "wise/serialize.hpp"
#include "wise/tokenize.hpp"

namespace wise {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kRelevantConsonants = "bdgkmt";
constexpr std::string_view kNoiseConsonants = "lnprsv";
constexpr std::string_view kFactConsonants = "fhjwxz";
constexpr std::size_t kSyllables = 30;
constexpr std::size_t kPoolSize = kSyllables * kSyllables * kSyllables;
constexpr std::size_t kFactWords = 5;
constexpr long kMaxDocuments = 200000;

/// Three-syllable word number `index` over one consonant set. Different
/// consonant sets never produce the same word.
std::string pseudo_word(std::string_view consonants, std::size_t index) {
    std::string w;
    for (int s = 0; s < 3; ++s) {
        const std::size_t syl = index % kSyllables;
        index /= kSyllables;
        w += consonants[syl / kVowels.size()];
        w += kVowels[syl % kVowels.size()];
    }
    return w;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

long ipow(long base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

long layer_size(const CorpusSpec& spec, int layer) { return spec.docs_per_layer * ipow(spec.branching, layer); }

std::vector<std::string> query_words(const CorpusSpec& spec) {
    const auto tokens = tokenize(spec.query, TokenPolicy::scoring());
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : tokens) {
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

struct Vocab {
    std::string_view consonants;
    const TokenSet* reserved;

    std::string draw(std::mt19937_64& rng) const {
        for (;;) {
            std::string w = pseudo_word(consonants, static_cast<std::size_t>(rng() % kPoolSize));
            if (!reserved->count(w) && !builtin_stopwords().count(w)) return w;
        }
    }
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

int relevant_slots(const CorpusSpec& spec) {
    const int noise = static_cast<int>(std::lround(spec.noise_ratio * spec.sentences_per_doc));
    return spec.sentences_per_doc - noise;
}

}  // namespace

std::string sim_uri(int layer, long index) {
    return "sim://doc/L" + std::to_string(layer) + "/" + std::to_string(index);
}

double CorpusSpec::overlap_at(int layer) const { return std::min(1.0, overlap_ratio * layer); }

void CorpusSpec::validate() const {
    if (depth < 1) throw ConfigError("depth must be >= 1");
    if (branching < 0) throw ConfigError("branching must be >= 0");
    if (docs_per_layer < 1) throw ConfigError("docs_per_layer must be >= 1");
    if (depth > 1 && branching == 0) throw ConfigError("depth > 1 needs branching >= 1");
    if (!(noise_ratio >= 0.0 && noise_ratio < 1.0)) throw ConfigError("noise_ratio must be in [0, 1)");
    if (!(overlap_ratio >= 0.0 && overlap_ratio <= 1.0)) throw ConfigError("overlap_ratio must be in [0, 1]");
    if (sentences_per_doc < 2) throw ConfigError("sentences_per_doc must be >= 2");
    if (words_per_sentence < 2) throw ConfigError("words_per_sentence must be >= 2");
    if (fact_path_richness < 0) throw ConfigError("fact_path_richness must be >= 0");
    if (relevant_slots(*this) < 2) throw ConfigError("noise_ratio leaves fewer than two relevant sentences per document");
    long total = 0;
    for (int d = 0; d < depth; ++d) {
        total += layer_size(*this, d);
        if (total > kMaxDocuments) throw ConfigError("corpus would exceed " + std::to_string(kMaxDocuments) + " documents");
    }
    const auto qwords = query_words(*this);
    if (qwords.empty()) throw ConfigError("query has no content words");
    const TokenSet qset(qwords.begin(), qwords.end());

    std::set<std::string> ids;
    std::map<std::pair<int, int>, int> per_doc;
    for (const auto& f : facts) {
        if (trim(f.id).empty()) throw ConfigError("fact id must not be empty");
        if (!ids.insert(f.id).second) throw ConfigError("duplicate fact id " + f.id);
        if (f.depth < 0 || f.depth >= depth) {
            throw ConfigError("fact " + f.id + " is planted at depth " + std::to_string(f.depth) +
                              " but the corpus has " + std::to_string(depth) + " layers");
        }
        if (f.branch < 0 || f.branch >= docs_per_layer) throw ConfigError("fact " + f.id + " has no such branch");
        if (!f.sentence.empty()) {
            const auto toks = token_set(f.sentence, TokenPolicy::scoring());
            const bool has_query = std::any_of(toks.begin(), toks.end(), [&](const auto& t) { return qset.count(t); });
            const bool has_own = std::any_of(toks.begin(), toks.end(), [&](const auto& t) { return !qset.count(t); });
            if (!has_query || !has_own) {
                throw ConfigError("fact " + f.id + " must contain a query word and at least one other word");
            }
        }
        ++per_doc[{f.depth, f.branch}];
    }
    for (const auto& [where, n] : per_doc) {
        const bool nav = where.first < depth - 1;
        if (n > relevant_slots(*this) - (nav ? 1 : 0)) {
            throw ConfigError("too many facts in one document for its relevant sentence budget");
        }
    }
}

CorpusSpec acceptance_spec() {
    CorpusSpec s;
    s.depth = 3;
    s.branching = 5;
    s.docs_per_layer = 5;
    s.noise_ratio = 0.8;
    s.overlap_ratio = 0.4;
    s.seed = 42;
    s.facts = {
        {"f0-root", "", 0, 0},
        {"f1-root", "", 0, 1},
        {"f0-child", "", 1, 0},
        {"f1-child", "", 1, 1},
    };
    return s;
}

const SimDocument* CorpusManifest::find(std::string_view id) const {
    for (const auto& d : documents) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

CorpusManifest generate(const CorpusSpec& spec) {
    spec.validate();
    CorpusManifest m;
    m.spec = spec;

    const auto qwords = query_words(spec);
    const TokenSet reserved(qwords.begin(), qwords.end());
    const Vocab relevant{kRelevantConsonants, &reserved};
    const Vocab noise{kNoiseConsonants, &reserved};

    // Fact sentences.
    std::map<std::pair<int, int>, std::vector<const FactSpec*>> facts_at;
    std::map<int, int> chain_depth;  // branch -> deepest planted fact
    std::map<std::string, std::string> fact_sentence;
    const std::size_t fact_offset = static_cast<std::size_t>((spec.seed * 7919u) % (kPoolSize / 2));
    for (std::size_t k = 0; k < spec.facts.size(); ++k) {
        const auto& f = spec.facts[k];
        facts_at[{f.depth, f.branch}].push_back(&f);
        chain_depth[f.branch] = std::max(chain_depth.count(f.branch) ? chain_depth[f.branch] : 0, f.depth);
        std::string s = f.sentence;
        if (s.empty()) {
            s = capitalize(qwords[k % qwords.size()]);
            for (std::size_t j = 0; j < kFactWords; ++j) {
                s += " " + pseudo_word(kFactConsonants, (fact_offset + k * kFactWords + j) % kPoolSize);
            }
            s += ".";
        }
        fact_sentence[f.id] = s;
    }

    std::string nav_lead = "Linked records for";
    for (const auto& q : qwords) nav_lead += " " + q;
    nav_lead += ":";

    const int slots = relevant_slots(spec);
    const int noise_count = spec.sentences_per_doc - slots;
    std::vector<std::vector<std::string>> prev_lineage;  // ancestor content (including the doc itself)

    for (int d = 0; d < spec.depth; ++d) {
        const long count = layer_size(spec, d);
        const bool has_nav = d < spec.depth - 1 && spec.branching > 0;
        std::vector<std::vector<std::string>> lineage(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                              static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);

            SimDocument doc;
            doc.id = sim_uri(d, i);
            doc.layer = d;

            const long root = i / ipow(spec.branching == 0 ? 1 : spec.branching, d);
            const bool on_chain = i == root * ipow(spec.branching, d) && chain_depth.count(static_cast<int>(root)) &&
                                  d <= chain_depth[static_cast<int>(root)];
            const int extra = on_chain ? spec.fact_path_richness : 0;

            std::vector<std::string> planted;
            if (auto it = facts_at.find({d, static_cast<int>(root)}); it != facts_at.end() && on_chain) {
                for (const auto* f : it->second) planted.push_back(f->id);
            }

            const int content_slots = slots - (has_nav ? 1 : 0) - static_cast<int>(planted.size());
            std::vector<std::string> content;
            for (int s = 0; s < content_slots; ++s) {
                std::string sentence = capitalize(qwords[pick(rng, qwords.size())]);
                for (int w = 0; w < spec.words_per_sentence - 1 + extra; ++w) sentence += " " + relevant.draw(rng);
                content.push_back(sentence + ".");
            }

            // Replace leading fresh sentences by copies of ancestor sentences.
            std::vector<std::string> ancestors;
            if (d > 0) ancestors = prev_lineage[static_cast<std::size_t>(i / spec.branching)];
            std::sort(ancestors.begin(), ancestors.end());
            ancestors.erase(std::unique(ancestors.begin(), ancestors.end()), ancestors.end());
            const long wanted = std::lround(spec.overlap_at(d) * content_slots);
            const std::size_t repeats = std::min<std::size_t>(static_cast<std::size_t>(wanted), ancestors.size());
            for (std::size_t r = 0; r < repeats; ++r) {
                const std::size_t j = r + pick(rng, ancestors.size() - r);
                std::swap(ancestors[r], ancestors[j]);
                content[r] = ancestors[r];
            }

            std::vector<std::string> body = content;
            for (const auto& id : planted) body.push_back(fact_sentence[id]);
            for (int s = 0; s < noise_count; ++s) {
                std::string sentence = capitalize(noise.draw(rng));
                for (int w = 1; w < spec.words_per_sentence; ++w) sentence += " " + noise.draw(rng);
                body.push_back(sentence + ".");
            }
            for (std::size_t k = body.size(); k > 1; --k) std::swap(body[k - 1], body[pick(rng, k)]);

            for (const auto& s : body) doc.text += s + "\n";
            if (has_nav) {
                std::string line = nav_lead;
                for (int j = 0; j < spec.branching; ++j) {
                    line += j == 0 ? " " : "; ";
                    const std::string anchor = "record " + std::to_string(j + 1);
                    const std::size_t offset = doc.text.size() + line.size();
                    line += anchor;
                    doc.links.push_back({sim_uri(d + 1, i * spec.branching + j), anchor, TextSpan{offset, anchor.size()}});
                }
                doc.text += line + ".\n";
            }
            doc.sentence_count = spec.sentences_per_doc;
            doc.noise_sentence_count = noise_count;
            doc.facts = planted;
            for (const auto& id : planted) m.facts.push_back({id, fact_sentence[id], doc.id});

            auto& lin = lineage[static_cast<std::size_t>(i)];
            if (d > 0) lin = prev_lineage[static_cast<std::size_t>(i / spec.branching)];
            lin.insert(lin.end(), content.begin(), content.end());
            m.documents.push_back(std::move(doc));
        }
        prev_lineage = std::move(lineage);
    }
    std::sort(m.facts.begin(), m.facts.end(), [](const PlantedFact& a, const PlantedFact& b) { return a.id < b.id; });
    return m;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const FactSpec& f) {
    j = json{{"id", f.id}, {"sentence", f.sentence}, {"depth", f.depth}, {"branch", f.branch}};
}

void from_json(const json& j, FactSpec& f) {
    f.id = j.at("id").get<std::string>();
    f.sentence = j.value("sentence", std::string());
    f.depth = j.at("depth").get<int>();
    f.branch = j.value("branch", 0);
}

void to_json(json& j, const CorpusSpec& s) {
    j = json{{"depth", s.depth},
             {"branching", s.branching},
             {"docs_per_layer", s.docs_per_layer},
             {"noise_ratio", s.noise_ratio},
             {"overlap_ratio", s.overlap_ratio},
             {"facts", s.facts},
             {"seed", s.seed},
             {"query", s.query},
             {"sentences_per_doc", s.sentences_per_doc},
             {"words_per_sentence", s.words_per_sentence},
             {"fact_path_richness", s.fact_path_richness}};
}

void from_json(const json& j, CorpusSpec& s) {
    static const std::set<std::string> known{"depth", "branching", "docs_per_layer", "noise_ratio",
                                             "overlap_ratio", "facts", "seed", "query", "sentences_per_doc",
                                             "words_per_sentence", "fact_path_richness"};
    if (!j.is_object()) throw ConfigError("corpus spec must be a JSON object");
    for (const auto& [k, _] : j.items()) {
        if (!known.count(k)) throw ConfigError("unknown corpus spec field '" + k + "'");
    }
    CorpusSpec d;
    s.depth = j.value("depth", d.depth);
    s.branching = j.value("branching", d.branching);
    s.docs_per_layer = j.value("docs_per_layer", d.docs_per_layer);
    s.noise_ratio = j.value("noise_ratio", d.noise_ratio);
    s.overlap_ratio = j.value("overlap_ratio", d.overlap_ratio);
    s.facts = j.value("facts", d.facts);
    s.seed = j.value("seed", d.seed);
    s.query = j.value("query", d.query);
    s.sentences_per_doc = j.value("sentences_per_doc", d.sentences_per_doc);
    s.words_per_sentence = j.value("words_per_sentence", d.words_per_sentence);
    s.fact_path_richness = j.value("fact_path_richness", d.fact_path_richness);
}

void to_json(json& j, const CorpusManifest& m) {
    json docs = json::array();
    for (const auto& d : m.documents) {
        json links = json::array();
        for (const auto& l : d.links) {
            links.push_back(json{{"uri", l.uri}, {"anchor_text", l.anchor_text}, {"anchor_span", l.anchor_span}});
        }
        docs.push_back(json{{"id", d.id},
                            {"layer", d.layer},
                            {"text", d.text},
                            {"links", links},
                            {"facts", d.facts},
                            {"sentence_count", d.sentence_count},
                            {"noise_sentence_count", d.noise_sentence_count}});
    }
    json facts = json::array();
    for (const auto& f : m.facts) facts.push_back(json{{"id", f.id}, {"sentence", f.sentence}, {"document", f.document}});
    j = json{{"spec", m.spec}, {"documents", docs}, {"facts", facts}};
}

void from_json(const json& j, CorpusManifest& m) {
    m.spec = j.at("spec").get<CorpusSpec>();
    m.documents.clear();
    for (const auto& jd : j.at("documents")) {
        SimDocument d;
        d.id = jd.at("id").get<std::string>();
        d.layer = jd.at("layer").get<int>();
        d.text = jd.at("text").get<std::string>();
        for (const auto& jl : jd.at("links")) {
            d.links.push_back({jl.at("uri").get<std::string>(), jl.at("anchor_text").get<std::string>(),
                               jl.at("anchor_span").get<TextSpan>()});
        }
        d.facts = jd.value("facts", std::vector<std::string>{});
        d.sentence_count = jd.value("sentence_count", 0);
        d.noise_sentence_count = jd.value("noise_sentence_count", 0);
        m.documents.push_back(std::move(d));
    }
    m.facts.clear();
    for (const auto& jf : j.at("facts")) {
        m.facts.push_back({jf.at("id").get<std::string>(), jf.at("sentence").get<std::string>(),
                           jf.at("document").get<std::string>()});
    }
}

CorpusManifest load_manifest(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open corpus manifest " + file.string());
    try {
        return json::parse(in).get<CorpusManifest>();
    } catch (const json::exception& e) {
        throw ConfigError("malformed corpus manifest " + file.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Provider and measurement

SimProvider::SimProvider(const CorpusManifest& manifest) : manifest_(manifest) {
    for (const auto& d : manifest_.documents) index_.emplace(d.id, &d);
}

RawContent SimProvider::resolve(const SourceRef& source) {
    auto it = index_.find(source.uri);
    if (it == index_.end()) return failed_content(source, FetchStatus::not_found, "no such document", 0);
    const SimDocument& d = *it->second;
    RawContent raw;
    raw.source = source;
    raw.text = d.text;
    raw.sections = {Section{"body", d.text}};
    raw.status = FetchStatus::ok;
    for (const auto& l : d.links) {
        raw.links.push_back(SourceRef{l.uri, source.uri, source.layer + 1, l.anchor_text, l.anchor_span});
    }
    return raw;
}

std::vector<SourceRef> SimProvider::roots() const {
    std::vector<SourceRef> out;
    for (const auto& d : manifest_.documents) {
        if (d.layer == 0) out.push_back(SourceRef{d.id, std::nullopt, 0, std::nullopt, std::nullopt});
    }
    return out;
}

void to_json(json& j, const SimMeasurement& m) {
    j = json{{"fact_recall", m.fact_recall},
             {"processed_text_fraction", m.processed_text_fraction},
             {"filtered_volume_reduction", m.filtered_volume_reduction ? json(*m.filtered_volume_reduction) : json()},
             {"layers_explored", m.layers_explored},
             {"facts_found", m.facts_found},
             {"facts_missed", m.facts_missed}};
}

SimMeasurement measure(const RunTrace& trace, const KnowledgeContainer& container, const CorpusManifest& manifest) {
    std::map<std::string_view, const SimDocument*> docs;
    for (const auto& d : manifest.documents) docs.emplace(d.id, &d);

    const TokenPolicy policy = TokenPolicy::from_config(trace.config.stopword_policy, trace.config.stopword_file);
    std::set<std::string> fetched;
    std::size_t filtered_sum = 0, raw_sum = 0;
    for (const auto& layer : trace.layers) {
        for (const auto& o : layer.sources) {
            if (!docs.count(o.source.uri)) {
                throw std::invalid_argument("trace source " + o.source.uri + " is not in the corpus manifest");
            }
            if (o.status != FetchStatus::ok) continue;
            if (o.raw_token_count != token_set(docs.at(o.source.uri)->text, policy).size()) {
                throw std::invalid_argument("trace source " + o.source.uri + " differs from the manifest document");
            }
            fetched.insert(o.source.uri);
            if (o.error.empty()) {
                filtered_sum += o.score.word_count;
                raw_sum += o.raw_token_count;
            }
        }
    }

    SimMeasurement m;
    m.layers_explored = static_cast<int>(trace.layers.size());
    std::size_t all = 0, seen = 0;
    for (const auto& d : manifest.documents) {
        const std::size_t n = tokenize(d.text, policy).size();
        all += n;
        if (fetched.count(d.id)) seen += n;
    }
    m.processed_text_fraction = all == 0 ? 0.0 : static_cast<double>(seen) / static_cast<double>(all);
    if (raw_sum > 0) {
        m.filtered_volume_reduction = 1.0 - static_cast<double>(filtered_sum) / static_cast<double>(raw_sum);
    }

    for (const auto& f : manifest.facts) {
        const auto carrier = token_set(f.sentence, policy);
        const bool found = std::includes(container.tokens.begin(), container.tokens.end(), carrier.begin(), carrier.end());
        (found ? m.facts_found : m.facts_missed).push_back(f.id);
    }
    m.fact_recall = manifest.facts.empty() ? 1.0
                                           : static_cast<double>(m.facts_found.size()) /
                                                 static_cast<double>(manifest.facts.size());
    return m;
}

}  // namespace wise
