#include "wise/tokenize.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>
#include <sstream>

namespace wise {

namespace {

// Classic English function-word list. Changing it requires bumping
// kBuiltinStopwordsVersion.
constexpr std::string_view kBuiltinStopwordText =
    "a about above after again against all am an and any are as at be because been "
    "before being below between both but by can could did do does doing down during "
    "each few for from further had has have having he her here hers herself him "
    "himself his how i if in into is it its itself just me more most my myself no nor "
    "not now of off on once only or other our ours ourselves out over own same she "
    "should so some such than that the their theirs them themselves then there these "
    "they this those through to too under until up very was we were what when where "
    "which while who whom why will with would you your yours yourself yourselves";

enum class CharClass { token, separator, apostrophe, other };

CharClass classify(UChar32 c) {
    if (c == '\'' || c == 0x2019 || c == 0x02BC) return CharClass::apostrophe;
    if (u_isUWhiteSpace(c) || u_iscntrl(c)) return CharClass::separator;
    if (c == '-' || c == '/' || c == '\\' || c == 0x2044 || c == 0x2215 ||
        u_charType(c) == U_DASH_PUNCTUATION) {
        return CharClass::separator;
    }
    if (u_isalnum(c)) return CharClass::token;
    switch (u_charType(c)) {
        case U_NON_SPACING_MARK:
        case U_ENCLOSING_MARK:
        case U_COMBINING_SPACING_MARK:
        case U_OTHER_LETTER:
        case U_MODIFIER_LETTER:
        case U_LETTER_NUMBER:
        case U_OTHER_NUMBER:
            return CharClass::token;
        default:
            return CharClass::other;
    }
}

icu::UnicodeString normalize_nfc(std::string_view text) {
    auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) return src;
    icu::UnicodeString out = nfc->normalize(src, status);
    return U_FAILURE(status) ? src : out;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

const StopwordList& builtin_stopwords() {
    static const StopwordList list = [] {
        StopwordList out;
        std::istringstream in{std::string(kBuiltinStopwordText)};
        std::string w;
        while (in >> w) out.insert(w);
        return out;
    }();
    return list;
}

StopwordList load_stopword_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read stopword file: " + path.string());
    StopwordList out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto lower = icu::UnicodeString::fromUTF8(t).toLower(icu::Locale::getRoot());
        out.insert(to_utf8(lower));
    }
    return out;
}

TokenPolicy TokenPolicy::scoring() { return TokenPolicy{}; }

TokenPolicy TokenPolicy::metric() {
    TokenPolicy p;
    p.stopwords = StopwordPolicy::none;
    return p;
}

TokenPolicy TokenPolicy::from_config(StopwordPolicy policy, const std::string& stopword_file) {
    TokenPolicy p;
    p.stopwords = policy;
    if (policy == StopwordPolicy::custom) {
        p.custom_stopwords = std::make_shared<const StopwordList>(load_stopword_file(stopword_file));
    }
    p.validate();
    return p;
}

void TokenPolicy::validate() const {
    if (min_token_length < 1) throw ConfigError("min_token_length must be >= 1");
    if (stopwords == StopwordPolicy::custom && !custom_stopwords) {
        throw ConfigError("custom stopword policy without a stopword list");
    }
}

std::string TokenPolicy::fingerprint() const {
    std::ostringstream out;
    out << "tok1;lc=" << lowercase << ";sp=" << strip_punctuation << ";min=" << min_token_length
        << ";sw=";
    switch (stopwords) {
        case StopwordPolicy::none:
            out << "none";
            break;
        case StopwordPolicy::builtin:
            out << "builtin:" << kBuiltinStopwordsVersion;
            break;
        case StopwordPolicy::custom: {
            std::uint64_t h = fnv1a("");
            if (custom_stopwords) {
                for (const auto& w : *custom_stopwords) h = fnv1a(w + "\n", h);
            }
            out << "custom:" << std::hex << h;
            break;
        }
    }
    return out.str();
}

std::vector<std::string> tokenize(std::string_view text, const TokenPolicy& policy) {
    std::vector<std::string> tokens;
    if (text.empty()) return tokens;

    const StopwordList* stop = nullptr;
    if (policy.stopwords == StopwordPolicy::builtin) stop = &builtin_stopwords();
    if (policy.stopwords == StopwordPolicy::custom) stop = policy.custom_stopwords.get();

    const icu::UnicodeString normalized = normalize_nfc(text);
    icu::UnicodeString current;

    auto flush = [&] {
        if (current.isEmpty()) return;
        if (policy.lowercase) current.toLower(icu::Locale::getRoot());
        if (static_cast<std::size_t>(current.countChar32()) >= policy.min_token_length) {
            std::string tok = to_utf8(current);
            bool drop = false;
            if (stop != nullptr) {
                if (policy.lowercase) {
                    drop = stop->contains(tok);
                } else {
                    icu::UnicodeString lower(current);
                    drop = stop->contains(to_utf8(lower.toLower(icu::Locale::getRoot())));
                }
            }
            if (!drop) tokens.push_back(std::move(tok));
        }
        current.remove();
    };

    for (int32_t i = 0; i < normalized.length();) {
        const UChar32 c = normalized.char32At(i);
        i = normalized.moveIndex32(i, 1);
        switch (classify(c)) {
            case CharClass::token:
                current.append(c);
                break;
            case CharClass::separator:
                flush();
                break;
            case CharClass::apostrophe:
                if (!policy.strip_punctuation) current.append(c);
                break;
            case CharClass::other:
                if (policy.strip_punctuation) {
                    flush();
                } else {
                    current.append(c);
                }
                break;
        }
    }
    flush();
    return tokens;
}

TokenSet token_set(std::string_view text, const TokenPolicy& policy) {
    auto list = tokenize(text, policy);
    return TokenSet(std::make_move_iterator(list.begin()), std::make_move_iterator(list.end()));
}

}  // namespace wise
