#pragma once

// One tokenizer for everything that does set arithmetic on text: filtering,
// scoring, fusion, and the overlap metrics. Two token sets are only
// comparable when they were built under the same TokenPolicy, which is why
// every policy carries a fingerprint.
//
// Pipeline, in order:
//   1. Unicode NFC composition.
//   2. Split on whitespace, hyphens/dashes and slashes (always).
//   3. With strip_punctuation, every other punctuation or symbol character
//      also splits; apostrophes inside a word are dropped ("don't" -> "dont").
//      Without it, those characters stay inside the token.
//   4. Optional lowercasing. Greek and other scripts are folded, not
//      transliterated ("β" stays "β").
//   5. Tokens shorter than min_token_length code points are dropped.
//   6. Stopwords are dropped per policy (compared in lowercase).
// Digits are ordinary token characters.

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wise/core.hpp"

namespace wise {

using StopwordList = std::set<std::string, std::less<>>;

/// Version tag of the builtin English list; part of every fingerprint that
/// uses it so caches and containers built with an older list never mix.
inline constexpr std::string_view kBuiltinStopwordsVersion = "en-2024.1";

const StopwordList& builtin_stopwords();

/// One token per line, UTF-8, '#' starts a comment line. Entries are
/// lowercased. Throws ConfigError if the file cannot be read.
StopwordList load_stopword_file(const std::filesystem::path& path);

struct TokenPolicy {
    bool lowercase = true;
    bool strip_punctuation = true;
    StopwordPolicy stopwords = StopwordPolicy::builtin;
    std::shared_ptr<const StopwordList> custom_stopwords;
    std::size_t min_token_length = 1;

    /// Lowercase, punctuation stripped, builtin stopwords. Used for scoring,
    /// filtering and fusion.
    static TokenPolicy scoring();
    /// Lowercase, punctuation stripped, no stopwords. Used for ROUGE/BLEU.
    static TokenPolicy metric();
    static TokenPolicy from_config(StopwordPolicy policy, const std::string& stopword_file);

    void validate() const;
    [[nodiscard]] std::string fingerprint() const;
};

std::vector<std::string> tokenize(std::string_view text, const TokenPolicy& policy);
TokenSet token_set(std::string_view text, const TokenPolicy& policy);

}  // namespace wise
