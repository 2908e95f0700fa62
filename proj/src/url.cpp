#include "wise/url.hpp"

#include <algorithm>
#include <cctype>

#include "wise/core.hpp"

namespace wise {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

std::string lower_host(std::string_view authority) {
    // userinfo@host:port -- only the host part is case-insensitive.
    const auto at = authority.rfind('@');
    const std::size_t host_begin = at == std::string_view::npos ? 0 : at + 1;
    std::string out(authority.substr(0, host_begin));
    out += lower(authority.substr(host_begin));
    return out;
}

}  // namespace

std::optional<Url> Url::parse(std::string_view text) {
    const std::string cleaned = trim(text);
    std::string_view s = cleaned;
    for (unsigned char c : s) {
        if (c < 0x20 || c == ' ') return std::nullopt;
    }
    Url u;
    if (auto colon = s.find(':'); colon != std::string_view::npos) {
        auto first_delim = s.find_first_of("/?#");
        if (first_delim == std::string_view::npos || colon < first_delim) {
            if (!valid_scheme(s.substr(0, colon))) return std::nullopt;
            u.scheme = lower(s.substr(0, colon));
            s.remove_prefix(colon + 1);
        }
    }
    if (auto hash = s.find('#'); hash != std::string_view::npos) {
        u.fragment = std::string(s.substr(hash + 1));
        s = s.substr(0, hash);
    }
    if (auto q = s.find('?'); q != std::string_view::npos) {
        u.query = std::string(s.substr(q + 1));
        s = s.substr(0, q);
    }
    if (s.starts_with("//")) {
        s.remove_prefix(2);
        auto slash = s.find('/');
        u.authority = lower_host(s.substr(0, slash));
        s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
    }
    u.path = std::string(s);
    return u;
}

std::string Url::str() const {
    std::string out;
    if (!scheme.empty()) out += scheme + ":";
    if (authority) out += "//" + *authority;
    out += path;
    if (query) out += "?" + *query;
    if (fragment) out += "#" + *fragment;
    return out;
}

std::string Url::host() const {
    if (!authority) return {};
    std::string_view a = *authority;
    if (auto at = a.rfind('@'); at != std::string_view::npos) a.remove_prefix(at + 1);
    if (a.starts_with('[')) {
        auto close = a.find(']');
        return std::string(a.substr(0, close == std::string_view::npos ? a.size() : close + 1));
    }
    return std::string(a.substr(0, a.find(':')));
}

std::string remove_dot_segments(std::string_view in) {
    std::string input(in);
    std::string output;
    while (!input.empty()) {
        if (input.starts_with("../")) {
            input.erase(0, 3);
        } else if (input.starts_with("./")) {
            input.erase(0, 2);
        } else if (input.starts_with("/./")) {
            input.replace(0, 3, "/");
        } else if (input == "/.") {
            input = "/";
        } else if (input.starts_with("/../") || input == "/..") {
            if (input == "/..") {
                input = "/";
            } else {
                input.replace(0, 4, "/");
            }
            auto last = output.rfind('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            const std::size_t start = input.front() == '/' ? 1 : 0;
            auto next = input.find('/', start);
            if (next == std::string::npos) next = input.size();
            output += input.substr(0, next);
            input.erase(0, next);
        }
    }
    return output;
}

std::optional<std::string> resolve_url(std::string_view base_text, std::string_view ref_text) {
    auto ref = Url::parse(ref_text);
    if (!ref) return std::nullopt;
    Url target;
    if (!ref->scheme.empty()) {
        target = *ref;
        target.path = remove_dot_segments(ref->path);
    } else {
        auto base = Url::parse(base_text);
        if (!base || !base->absolute()) return std::nullopt;
        target.scheme = base->scheme;
        if (ref->authority) {
            target.authority = ref->authority;
            target.path = remove_dot_segments(ref->path);
            target.query = ref->query;
        } else {
            target.authority = base->authority;
            if (ref->path.empty()) {
                target.path = base->path;
                target.query = ref->query ? ref->query : base->query;
            } else {
                if (ref->path.front() == '/') {
                    target.path = remove_dot_segments(ref->path);
                } else {
                    std::string merged;
                    if (base->authority && base->path.empty()) {
                        merged = "/" + ref->path;
                    } else {
                        auto slash = base->path.rfind('/');
                        merged = (slash == std::string::npos ? std::string{} : base->path.substr(0, slash + 1)) +
                                 ref->path;
                    }
                    target.path = remove_dot_segments(merged);
                }
                target.query = ref->query;
            }
        }
    }
    target.fragment.reset();
    if ((target.scheme == "http" || target.scheme == "https") && target.path.empty()) target.path = "/";
    std::string out = target.str();
    if (!is_crawlable_url(out)) return std::nullopt;
    return out;
}

bool is_crawlable_url(std::string_view uri) {
    auto u = Url::parse(uri);
    if (!u || !u->absolute()) return false;
    if (u->scheme == "http" || u->scheme == "https") return u->authority && !u->host().empty();
    if (u->scheme == "file") return !u->path.empty();
    return u->scheme == "sim";  // synthetic corpus locators
}

}  // namespace wise
