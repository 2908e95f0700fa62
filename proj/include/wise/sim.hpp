#pragma once

// Synthetic linked corpora with planted facts.
//
// Layout: `docs_per_layer` root documents at layer 0; every document above
// the last layer links to `branching` children, so layer d holds
// docs_per_layer * branching^d documents named sim://doc/L{d}/{i}. Child j
// of document (d, i) is (d + 1, i * branching + j).
//
// Each document has `sentences_per_doc` sentences. round(noise_ratio * n) of
// them are noise drawn from a vocabulary that shares no token with the query
// or with the relevant vocabulary; the rest each carry a query word. Non-leaf
// documents spend one relevant sentence on a navigation line that holds the
// child links. At layer d a fraction min(1, overlap_ratio * d) of the
// remaining relevant sentences are verbatim copies of ancestor sentences.
//
// A fact is one carrier sentence with its own vocabulary, planted on the
// first-child chain below root `branch` at `depth`. Documents on a chain
// (down to the deepest fact planted on it) get `fact_path_richness` extra
// relevant words per sentence, which makes that chain the top-scoring one.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wise/core.hpp"
#include "wise/fetch.hpp"

namespace wise {

struct FactSpec {
    std::string id;
    std::string sentence;  // generated when empty
    int depth = 0;
    int branch = 0;  // root index of the carrying chain
};

struct CorpusSpec {
    int depth = 3;
    int branching = 5;
    int docs_per_layer = 5;  // number of roots
    double noise_ratio = 0.8;
    double overlap_ratio = 0.4;
    std::vector<FactSpec> facts;
    std::uint64_t seed = 42;
    std::string query = "Which disorders involve the zeta gene?";
    int sentences_per_doc = 20;
    int words_per_sentence = 8;
    int fact_path_richness = 3;

    /// Throws ConfigError on an inconsistent spec.
    void validate() const;
    [[nodiscard]] double overlap_at(int layer) const;
};

/// The corpus used by the end-to-end acceptance run: depth 3, branching 5,
/// noise 0.8, overlap 0.4, seed 42, facts at layers 0 and 1 on two chains.
CorpusSpec acceptance_spec();

/// Threshold scaled to the acceptance corpus. Its best layer scores are
/// roughly 10.2, 3.3 and 1.4, so 2.0 stops the run at the third layer.
inline constexpr double kAcceptanceThreshold = 2.0;

struct SimLink {
    std::string uri;
    std::string anchor_text;
    TextSpan anchor_span;
};

struct SimDocument {
    std::string id;
    int layer = 0;
    std::string text;
    std::vector<SimLink> links;
    std::vector<std::string> facts;
    int sentence_count = 0;
    int noise_sentence_count = 0;
};

struct PlantedFact {
    std::string id;
    std::string sentence;
    std::string document;
};

struct CorpusManifest {
    CorpusSpec spec;
    std::vector<SimDocument> documents;
    std::vector<PlantedFact> facts;

    [[nodiscard]] const SimDocument* find(std::string_view id) const;
};

std::string sim_uri(int layer, long index);

CorpusManifest generate(const CorpusSpec& spec);

void to_json(nlohmann::json& j, const FactSpec& f);
void from_json(const nlohmann::json& j, FactSpec& f);
void to_json(nlohmann::json& j, const CorpusSpec& s);
void from_json(const nlohmann::json& j, CorpusSpec& s);
void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

CorpusManifest load_manifest(const std::filesystem::path& file);

/// In-memory provider. Unknown ids resolve to status not_found.
class SimProvider : public ContentProvider {
public:
    explicit SimProvider(const CorpusManifest& manifest);
    RawContent resolve(const SourceRef& source) override;
    [[nodiscard]] std::vector<SourceRef> roots() const;

private:
    const CorpusManifest& manifest_;
    std::map<std::string, const SimDocument*, std::less<>> index_;
};

struct SimMeasurement {
    double fact_recall = 0.0;
    double processed_text_fraction = 0.0;
    std::optional<double> filtered_volume_reduction;
    int layers_explored = 0;
    std::vector<std::string> facts_found;
    std::vector<std::string> facts_missed;
};

void to_json(nlohmann::json& j, const SimMeasurement& m);

/// Throws std::invalid_argument when the trace names a document that is not
/// in the manifest.
SimMeasurement measure(const RunTrace& trace, const KnowledgeContainer& container, const CorpusManifest& manifest);

}  // namespace wise
