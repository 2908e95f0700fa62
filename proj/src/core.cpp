#include "wise/core.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace wise {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table,
             std::string_view what) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw ConfigError("unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E e, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [value, name] : table) {
        if (value == e) return name;
    }
    return "?";
}

constexpr std::array<std::pair<FetchStatus, std::string_view>, 5> kFetchStatus{{
    {FetchStatus::ok, "ok"},
    {FetchStatus::blocked, "blocked"},
    {FetchStatus::paywalled, "paywalled"},
    {FetchStatus::network_error, "network_error"},
    {FetchStatus::not_found, "not_found"},
}};

constexpr std::array<std::pair<FilterMode, std::string_view>, 2> kFilterMode{{
    {FilterMode::extractive, "extractive"},
    {FilterMode::llm, "llm"},
}};

constexpr std::array<std::pair<StopwordPolicy, std::string_view>, 3> kStopwords{{
    {StopwordPolicy::none, "none"},
    {StopwordPolicy::builtin, "builtin"},
    {StopwordPolicy::custom, "custom"},
}};

constexpr std::array<std::pair<TerminationReason, std::string_view>, 3> kTermination{{
    {TerminationReason::threshold, "threshold"},
    {TerminationReason::exhausted, "exhausted"},
    {TerminationReason::max_layers, "max_layers"},
}};

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

Query Query::make(std::string text, std::string id) {
    if (trim(text).empty()) throw ConfigError("query text is empty");
    return Query{std::move(id), std::move(text)};
}

std::string_view to_string(FetchStatus s) { return enum_name(s, kFetchStatus); }
FetchStatus fetch_status_from_string(std::string_view s) {
    return parse_enum(s, kFetchStatus, "fetch status");
}
std::string_view to_string(FilterMode m) { return enum_name(m, kFilterMode); }
FilterMode filter_mode_from_string(std::string_view s) {
    return parse_enum(s, kFilterMode, "filter mode");
}
std::string_view to_string(StopwordPolicy p) { return enum_name(p, kStopwords); }
StopwordPolicy stopword_policy_from_string(std::string_view s) {
    return parse_enum(s, kStopwords, "stopword policy");
}
std::string_view to_string(TerminationReason r) { return enum_name(r, kTermination); }
TerminationReason termination_reason_from_string(std::string_view s) {
    return parse_enum(s, kTermination, "termination reason");
}

void EngineConfig::validate() const {
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (max_layers < 1) throw ConfigError("max_layers must be >= 1");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (politeness_delay.count() < 0) throw ConfigError("politeness_delay must be >= 0");
    if (stopword_policy == StopwordPolicy::custom && stopword_file.empty()) {
        throw ConfigError("custom stopword policy needs a stopword file");
    }
}

}  // namespace wise
