#pragma once

// Output-comparison metrics and the entity recall / level-of-detail tables.
//
// Text metrics tokenize with TokenPolicy::metric() (lowercase, punctuation
// stripped, stopwords kept). BLEU is single-reference sentence BLEU with
// uniform weights; unigram precision is unsmoothed and every higher order
// uses add-one smoothing, (matches + 1) / (total + 1).

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wise {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// nullopt when the reference has no n-grams of order n. Throws
/// std::invalid_argument for n < 1.
std::optional<Prf> rouge_n(std::string_view candidate, std::string_view reference, int n);
/// Longest-common-subsequence precision/recall/F1; nullopt on an empty reference.
std::optional<Prf> rouge_l(std::string_view candidate, std::string_view reference);
/// 0 for an empty candidate.
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);

struct SystemOutput {
    std::string system;
    std::string answer;
    std::vector<std::string> entities;
};

/// Keys are case-folded names; values are canonical names.
using AliasTable = std::map<std::string, std::string>;

struct ReferenceSet {
    std::vector<std::string> canonical;  // sorted by case-folded key
    AliasTable aliases;
};

struct LevelAnnotation {
    std::string entity;
    int level = 0;
    std::string justification;
};

/// NFC, trimmed, root-locale lowercase.
std::string fold_name(std::string_view name);

/// Maps a surface name to its canonical form (itself when unknown).
std::string canonicalize(std::string_view name, const ReferenceSet& reference);

/// nullopt when the reference is empty.
std::optional<double> recall(const SystemOutput& output, const ReferenceSet& reference);

ReferenceSet union_reference(const std::vector<SystemOutput>& outputs, const AliasTable& aliases);

/// nullopt when empty. Throws std::invalid_argument on a level outside 0..5.
std::optional<double> level_average(const std::vector<LevelAnnotation>& annotations);

struct MatrixRow {
    std::string reference_system;
    double rouge1 = 0.0;  // all four are mean F1 / BLEU over the other systems
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double bleu = 0.0;
};

/// One row per system used as reference. Needs at least two systems.
std::vector<MatrixRow> cross_system_matrix(const std::vector<SystemOutput>& outputs);

// ---------------------------------------------------------------------------
// Fixture files

class FixtureError : public std::runtime_error {
public:
    FixtureError(const std::filesystem::path& file, std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// {"system", "answer", "entities": [...]}
SystemOutput load_system_output(const std::filesystem::path& file);
/// Every *.json in the directory, sorted by file name.
std::vector<SystemOutput> load_system_outputs(const std::filesystem::path& dir);
/// {"canonical": [...], "aliases": {alias: canonical}}
ReferenceSet load_reference(const std::filesystem::path& file);
struct SystemLevels {
    std::string system;
    std::vector<LevelAnnotation> annotations;
};

/// [{"entity", "level", "justification"}], or that array wrapped as
/// {"system", "annotations": [...]}. Without the wrapper the system id is
/// the file stem.
SystemLevels load_levels(const std::filesystem::path& file);

}  // namespace wise
