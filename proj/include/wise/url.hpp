#pragma once

// Minimal RFC 3986 reference parsing and resolution.

#include <optional>
#include <string>
#include <string_view>

namespace wise {

struct Url {
    std::string scheme;  // lowercased
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    static std::optional<Url> parse(std::string_view text);

    [[nodiscard]] std::string str() const;
    /// Host without userinfo or port, lowercased. Empty if there is no authority.
    [[nodiscard]] std::string host() const;
    [[nodiscard]] bool absolute() const { return !scheme.empty(); }
};

std::string remove_dot_segments(std::string_view path);

/// Resolves `ref` against `base` (RFC 3986 section 5.2) and drops the
/// fragment. Returns nullopt for unparseable input and for schemes we do
/// not crawl (anything but http, https, file and the synthetic sim scheme).
std::optional<std::string> resolve_url(std::string_view base, std::string_view ref);

bool is_crawlable_url(std::string_view uri);

}  // namespace wise
