#include "wise/eval.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wise/core.hpp"
#include "wise/tokenize.hpp"

namespace wise {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    std::map<Gram, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[Gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

std::size_t total(const std::map<Gram, std::size_t>& counts) {
    std::size_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
}

std::size_t clipped_matches(const std::map<Gram, std::size_t>& cand, const std::map<Gram, std::size_t>& ref) {
    std::size_t m = 0;
    for (const auto& [g, c] : cand) {
        if (auto it = ref.find(g); it != ref.end()) m += std::min(c, it->second);
    }
    return m;
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::optional<Prf> rouge_n(std::string_view candidate, std::string_view reference, int n) {
    if (n < 1) throw std::invalid_argument("ROUGE-N needs n >= 1");
    const auto policy = TokenPolicy::metric();
    const auto ref = ngram_counts(tokenize(reference, policy), static_cast<std::size_t>(n));
    const std::size_t ref_total = total(ref);
    if (ref_total == 0) return std::nullopt;
    const auto cand = ngram_counts(tokenize(candidate, policy), static_cast<std::size_t>(n));
    const std::size_t cand_total = total(cand);
    const double m = static_cast<double>(clipped_matches(cand, ref));
    Prf out;
    out.precision = cand_total == 0 ? 0.0 : m / static_cast<double>(cand_total);
    out.recall = m / static_cast<double>(ref_total);
    out.f1 = f1_of(out.precision, out.recall);
    return out;
}

std::optional<Prf> rouge_l(std::string_view candidate, std::string_view reference) {
    const auto policy = TokenPolicy::metric();
    const auto ref = tokenize(reference, policy);
    if (ref.empty()) return std::nullopt;
    const auto cand = tokenize(candidate, policy);
    const double l = static_cast<double>(lcs_length(cand, ref));
    Prf out;
    out.precision = cand.empty() ? 0.0 : l / static_cast<double>(cand.size());
    out.recall = l / static_cast<double>(ref.size());
    out.f1 = f1_of(out.precision, out.recall);
    return out;
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
    if (max_n < 1) throw std::invalid_argument("BLEU needs max_n >= 1");
    const auto policy = TokenPolicy::metric();
    const auto cand = tokenize(candidate, policy);
    if (cand.empty()) return 0.0;
    const auto ref = tokenize(reference, policy);

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto c = ngram_counts(cand, static_cast<std::size_t>(n));
        const auto r = ngram_counts(ref, static_cast<std::size_t>(n));
        const double m = static_cast<double>(clipped_matches(c, r));
        const double t = static_cast<double>(total(c));
        const double p = n == 1 ? m / t : (m + 1.0) / (t + 1.0);
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    const double c_len = static_cast<double>(cand.size());
    const double r_len = static_cast<double>(ref.size());
    const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
    return bp * std::exp(log_sum / max_n);
}

// ---------------------------------------------------------------------------
// Entities

std::string fold_name(std::string_view name) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(name.data(), static_cast<int32_t>(name.size())));
    if (U_SUCCESS(status)) u = nfc->normalize(u, status);
    u.toLower(icu::Locale::getRoot());
    std::string out;
    u.toUTF8String(out);
    return trim(out);
}

std::string canonicalize(std::string_view name, const ReferenceSet& reference) {
    const std::string key = fold_name(name);
    if (auto it = reference.aliases.find(key); it != reference.aliases.end()) return it->second;
    for (const auto& c : reference.canonical) {
        if (fold_name(c) == key) return c;
    }
    return trim(name);
}

std::optional<double> recall(const SystemOutput& output, const ReferenceSet& reference) {
    if (reference.canonical.empty()) return std::nullopt;
    std::set<std::string> ref_keys;
    for (const auto& c : reference.canonical) ref_keys.insert(fold_name(c));
    std::set<std::string> hits;
    for (const auto& e : output.entities) {
        const std::string key = fold_name(canonicalize(e, reference));
        if (ref_keys.count(key)) hits.insert(key);
    }
    return static_cast<double>(hits.size()) / static_cast<double>(ref_keys.size());
}

ReferenceSet union_reference(const std::vector<SystemOutput>& outputs, const AliasTable& aliases) {
    ReferenceSet lookup;
    for (const auto& [k, v] : aliases) lookup.aliases.emplace(fold_name(k), v);
    std::map<std::string, std::string> by_key;
    for (const auto& o : outputs) {
        for (const auto& e : o.entities) {
            std::string c = canonicalize(e, lookup);
            by_key.emplace(fold_name(c), std::move(c));
        }
    }
    ReferenceSet out;
    out.aliases = lookup.aliases;
    for (auto& [_, c] : by_key) out.canonical.push_back(std::move(c));
    return out;
}

std::optional<double> level_average(const std::vector<LevelAnnotation>& annotations) {
    if (annotations.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& a : annotations) {
        if (a.level < 0 || a.level > 5) {
            throw std::invalid_argument("level for '" + a.entity + "' is outside 0..5");
        }
        sum += a.level;
    }
    return sum / static_cast<double>(annotations.size());
}

std::vector<MatrixRow> cross_system_matrix(const std::vector<SystemOutput>& outputs) {
    if (outputs.size() < 2) throw std::invalid_argument("matrix needs at least two systems");
    std::vector<MatrixRow> rows;
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        MatrixRow row;
        row.reference_system = outputs[r].system;
        const auto& ref = outputs[r].answer;
        for (std::size_t c = 0; c < outputs.size(); ++c) {
            if (c == r) continue;
            const auto& cand = outputs[c].answer;
            row.rouge1 += rouge_n(cand, ref, 1).value_or(Prf{}).f1;
            row.rouge2 += rouge_n(cand, ref, 2).value_or(Prf{}).f1;
            row.rougeL += rouge_l(cand, ref).value_or(Prf{}).f1;
            row.bleu += bleu(cand, ref);
        }
        const double others = static_cast<double>(outputs.size() - 1);
        row.rouge1 /= others;
        row.rouge2 /= others;
        row.rougeL /= others;
        row.bleu /= others;
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Fixtures

FixtureError::FixtureError(const fs::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

struct Document {
    fs::path path;
    std::string text;
    json value;
};

std::size_t line_at(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

Document read_document(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    Document d{path, ss.str(), {}};
    try {
        d.value = json::parse(d.text);
    } catch (const json::parse_error& e) {
        throw FixtureError(path, line_at(d.text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    return d;
}

/// Line of the first occurrence of "key" in the text (1 if absent).
std::size_t key_line(const Document& d, std::string_view key) {
    const auto pos = d.text.find("\"" + std::string(key) + "\"");
    return pos == std::string::npos ? 1 : line_at(d.text, pos);
}

/// Line on which each element of the top-level array (or of the array
/// stored under `member`) starts.
std::vector<std::size_t> element_lines(const std::string& text, std::size_t array_start) {
    std::vector<std::size_t> lines;
    int depth = 0;
    bool in_string = false, escaped = false, expect_value = false;
    for (std::size_t i = array_start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (depth == 1 && expect_value && c != ']') {
            lines.push_back(line_at(text, i));
            expect_value = false;
        }
        if (c == '"') in_string = true;
        else if (c == '[' || c == '{') {
            if (++depth == 1) expect_value = true;
        } else if (c == ']' || c == '}') {
            if (--depth == 0) break;
        } else if (c == ',' && depth == 1) {
            expect_value = true;
        }
    }
    return lines;
}

const json& require(const Document& d, const json& obj, std::string_view key, json::value_t type,
                    std::size_t line) {
    if (!obj.is_object()) throw FixtureError(d.path, line, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw FixtureError(d.path, line, "missing field '" + std::string(key) + "'");
    const bool ok = it->type() == type ||
                    (type == json::value_t::number_integer && it->type() == json::value_t::number_unsigned);
    if (!ok) throw FixtureError(d.path, key_line(d, key), "field '" + std::string(key) + "' has the wrong type");
    return *it;
}

std::vector<std::string> string_array(const Document& d, const json& arr, std::string_view key) {
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw FixtureError(d.path, key_line(d, key), "'" + std::string(key) + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

SystemOutput load_system_output(const fs::path& file) {
    const Document d = read_document(file);
    SystemOutput out;
    out.system = require(d, d.value, "system", json::value_t::string, 1).get<std::string>();
    out.answer = require(d, d.value, "answer", json::value_t::string, 1).get<std::string>();
    out.entities = string_array(d, require(d, d.value, "entities", json::value_t::array, 1), "entities");
    if (trim(out.system).empty()) throw FixtureError(file, key_line(d, "system"), "empty system id");
    return out;
}

std::vector<SystemOutput> load_system_outputs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FixtureError(dir, 0, "not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SystemOutput> out;
    for (const auto& f : files) out.push_back(load_system_output(f));
    return out;
}

ReferenceSet load_reference(const fs::path& file) {
    const Document d = read_document(file);
    ReferenceSet ref;
    const auto canonical = string_array(d, require(d, d.value, "canonical", json::value_t::array, 1), "canonical");
    std::map<std::string, std::string> by_key;
    for (const auto& c : canonical) {
        if (!by_key.emplace(fold_name(c), c).second) {
            throw FixtureError(file, key_line(d, c), "duplicate canonical name '" + c + "'");
        }
    }
    for (auto& [_, c] : by_key) ref.canonical.push_back(c);
    if (auto it = d.value.find("aliases"); it != d.value.end()) {
        if (!it->is_object()) throw FixtureError(file, key_line(d, "aliases"), "'aliases' must be an object");
        for (const auto& [alias, target] : it->items()) {
            if (!target.is_string()) throw FixtureError(file, key_line(d, alias), "alias target must be a string");
            const auto t = target.get<std::string>();
            if (!by_key.count(fold_name(t))) {
                throw FixtureError(file, key_line(d, alias), "alias '" + alias + "' points to unknown '" + t + "'");
            }
            ref.aliases[fold_name(alias)] = by_key[fold_name(t)];
        }
    }
    return ref;
}

SystemLevels load_levels(const fs::path& file) {
    const Document d = read_document(file);
    SystemLevels out;
    out.system = file.stem().string();
    const json* arr = &d.value;
    std::size_t array_start = d.text.find('[');
    if (d.value.is_object()) {
        if (d.value.contains("system")) out.system = require(d, d.value, "system", json::value_t::string, 1).get<std::string>();
        arr = &require(d, d.value, "annotations", json::value_t::array, 1);
        array_start = d.text.find('[', d.text.find("\"annotations\""));
    }
    if (!arr->is_array()) throw FixtureError(file, 1, "expected an array of annotations");
    const auto lines = element_lines(d.text, array_start == std::string::npos ? 0 : array_start);

    for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::size_t line = i < lines.size() ? lines[i] : 1;
        const json& item = (*arr)[i];
        if (!item.is_object()) throw FixtureError(file, line, "annotation must be an object");
        LevelAnnotation a;
        auto entity = item.find("entity");
        if (entity == item.end() || !entity->is_string()) throw FixtureError(file, line, "missing string 'entity'");
        auto level = item.find("level");
        if (level == item.end() || !level->is_number_integer()) {
            throw FixtureError(file, line, "missing integer 'level'");
        }
        a.entity = entity->get<std::string>();
        a.level = level->get<int>();
        if (a.level < 0 || a.level > 5) throw FixtureError(file, line, "level must be in 0..5");
        if (auto j = item.find("justification"); j != item.end()) {
            if (!j->is_string()) throw FixtureError(file, line, "'justification' must be a string");
            a.justification = j->get<std::string>();
        }
        out.annotations.push_back(std::move(a));
    }
    return out;
}

}  // namespace wise
