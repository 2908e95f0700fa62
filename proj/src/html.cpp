#include "wise/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <set>
#include <unordered_map>

#include "wise/url.hpp"

namespace wise {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals_prefix(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
    }
    return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
        if (iequals_prefix(s, i, needle)) return i;
    }
    return std::string_view::npos;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x110000) {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
    static const std::unordered_map<std::string_view, char32_t> table{
        {"amp", U'&'},     {"lt", U'<'},       {"gt", U'>'},      {"quot", U'"'},
        {"apos", U'\''},   {"nbsp", U' '},     {"ndash", U'–'}, {"mdash", U'—'},
        {"hellip", U'…'}, {"copy", U'©'}, {"reg", U'®'}, {"trade", U'™'},
        {"lsquo", U'‘'}, {"rsquo", U'’'}, {"ldquo", U'“'}, {"rdquo", U'”'},
        {"deg", U'°'}, {"plusmn", U'±'}, {"times", U'×'}, {"middot", U'·'},
        {"alpha", U'α'}, {"beta", U'β'}, {"gamma", U'γ'}, {"delta", U'δ'},
        {"epsilon", U'ε'}, {"zeta", U'ζ'}, {"kappa", U'κ'}, {"lambda", U'λ'},
        {"mu", U'μ'},   {"pi", U'π'},  {"sigma", U'σ'}, {"omega", U'ω'},
        {"Alpha", U'Α'}, {"Beta", U'Β'}, {"Gamma", U'Γ'}, {"Delta", U'Δ'},
    };
    return table;
}

// Elements whose whole subtree is boilerplate.
bool is_skipped_element(std::string_view tag) {
    static const std::set<std::string_view> skip{
        "script", "style", "noscript", "template", "svg",    "head",  "nav",
        "header", "footer", "aside",   "form",     "iframe", "button", "select", "canvas"};
    return skip.contains(tag);
}

// Elements whose content is raw text up to the matching close tag.
bool is_raw_text_element(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "textarea" || tag == "noscript";
}

bool is_block_element(std::string_view tag) {
    static const std::set<std::string_view> block{
        "p",       "div",     "br",  "li",  "ul",  "ol",    "tr",     "table", "section",
        "article", "main",    "dd",  "dt",  "dl",  "blockquote", "pre", "hr",  "figure",
        "figcaption", "caption", "td", "th", "tbody", "thead", "address", "body", "html",
        "h1", "h2", "h3", "h4", "h5", "h6"};
    return block.contains(tag);
}

int heading_level(std::string_view tag) {
    if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') return tag[1] - '0';
    return 0;
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::unordered_map<std::string, std::string> attributes;
    std::size_t end = 0;  // index just past '>'
};

// Parses a tag starting at s[pos] == '<'. Returns nullopt if this '<' does
// not start a tag (it is then treated as text).
std::optional<Tag> parse_tag(std::string_view s, std::size_t pos) {
    std::size_t i = pos + 1;
    Tag tag;
    if (i < s.size() && s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    const std::size_t name_begin = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':')) ++i;
    if (i == name_begin) return std::nullopt;
    tag.name = ascii_lower(s.substr(name_begin, i - name_begin));

    while (i < s.size() && s[i] != '>') {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        if (s[i] == '/') {
            tag.self_closing = true;
            ++i;
            continue;
        }
        const std::size_t key_begin = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' &&
               s[i] != '>' && s[i] != '/') {
            ++i;
        }
        std::string key = ascii_lower(s.substr(key_begin, i - key_begin));
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::string value;
        if (i < s.size() && s[i] == '=') {
            ++i;
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
                const char quote = s[i++];
                const std::size_t v_begin = i;
                while (i < s.size() && s[i] != quote) ++i;
                value = std::string(s.substr(v_begin, i - v_begin));
                if (i < s.size()) ++i;
            } else {
                const std::size_t v_begin = i;
                while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '>') ++i;
                value = std::string(s.substr(v_begin, i - v_begin));
            }
        }
        if (!key.empty()) tag.attributes.emplace(std::move(key), decode_entities(value));
        if (key_begin == i) ++i;  // stray character
    }
    tag.end = i < s.size() ? i + 1 : s.size();
    return tag;
}

std::string slugify(std::string_view heading) {
    std::string out;
    bool dash = false;
    for (unsigned char c : heading) {
        if (std::isalnum(c)) {
            if (dash && !out.empty()) out += '-';
            out += static_cast<char>(std::tolower(c));
            dash = false;
        } else {
            dash = true;
        }
    }
    return out.empty() ? std::string("section") : out;
}

// Accumulates collapsed text and tracks section starts and anchor spans.
class TextBuilder {
public:
    void text(std::string_view s) {
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                pending_space_ = true;
                continue;
            }
            if (pending_space_ && !out_.empty() && out_.back() != '\n') out_ += ' ';
            pending_space_ = false;
            out_ += c;
        }
    }

    void line_break() {
        if (!out_.empty() && out_.back() != '\n') out_ += '\n';
        pending_space_ = false;
    }

    [[nodiscard]] std::size_t size() const { return out_.size(); }
    [[nodiscard]] const std::string& str() const { return out_; }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
    bool pending_space_ = false;
};

struct SectionStart {
    std::size_t offset;
    std::string id;
};

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out += s[i++];
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        std::optional<char32_t> cp;
        if (name.starts_with('#') && name.size() > 1) {
            const bool hex = name[1] == 'x' || name[1] == 'X';
            std::string digits(name.substr(hex ? 2 : 1));
            try {
                std::size_t used = 0;
                const unsigned long v = std::stoul(digits, &used, hex ? 16 : 10);
                if (used == digits.size() && v > 0 && v < 0x110000) cp = static_cast<char32_t>(v);
            } catch (const std::exception&) {
            }
        } else if (auto it = named_entities().find(name); it != named_entities().end()) {
            cp = it->second;
        }
        if (cp) {
            append_utf8(out, *cp);
            i = semi + 1;
        } else {
            out += s[i++];
        }
    }
    return out;
}

MediaType media_type_for(std::string_view content_type, std::string_view uri) {
    const std::string ct = ascii_lower(content_type);
    if (ct.find("html") != std::string::npos) return MediaType::html;
    if (ct.find("xml") != std::string::npos) return MediaType::xml;
    if (!ct.empty()) return MediaType::text;
    std::string u = ascii_lower(uri);
    if (auto q = u.find_first_of("?#"); q != std::string::npos) u.resize(q);
    if (u.ends_with(".html") || u.ends_with(".htm") || u.ends_with(".xhtml")) return MediaType::html;
    if (u.ends_with(".xml")) return MediaType::xml;
    return MediaType::text;
}

ExtractedDocument extract_document(std::string_view markup, MediaType type, std::string_view base_uri) {
    ExtractedDocument doc;
    if (type == MediaType::text) {
        doc.text = std::string(markup);
        if (!doc.text.empty()) doc.sections.push_back({"body", doc.text});
        return doc;
    }

    TextBuilder builder;
    std::vector<SectionStart> starts{{0, "body"}};
    std::set<std::string> used_ids{"body"};
    int skip_depth = 0;
    std::vector<std::string> skip_stack;

    bool heading_open = false;
    std::size_t heading_text = 0, heading_section = 0;

    struct OpenAnchor {
        std::string href;
        std::size_t start;
    };
    std::optional<OpenAnchor> anchor;
    std::set<std::string> seen_links;

    auto close_anchor = [&] {
        if (!anchor) return;
        std::size_t b = anchor->start;
        std::size_t e = builder.size();
        const std::string& out = builder.str();
        while (b < e && std::isspace(static_cast<unsigned char>(out[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(out[e - 1]))) --e;
        auto resolved = resolve_url(base_uri, anchor->href);
        auto own = resolve_url(base_uri, "");
        // Same-document fragments resolve back to the page itself.
        if (resolved && (!own || *resolved != *own) && seen_links.insert(*resolved).second) {
            SourceRef ref;
            ref.uri = *resolved;
            if (e > b) {
                ref.anchor_text = out.substr(b, e - b);
                ref.anchor_span = TextSpan{b, e - b};
            }
            doc.links.push_back(std::move(ref));
        }
        anchor.reset();
    };

    std::size_t i = 0;
    while (i < markup.size()) {
        if (markup[i] != '<') {
            const auto next = markup.find('<', i);
            const auto chunk = markup.substr(i, next == std::string_view::npos ? std::string_view::npos : next - i);
            if (skip_depth == 0) builder.text(decode_entities(chunk));
            i = next == std::string_view::npos ? markup.size() : next;
            continue;
        }
        if (markup.substr(i).starts_with("<!--")) {
            const auto end = markup.find("-->", i + 4);
            i = end == std::string_view::npos ? markup.size() : end + 3;
            continue;
        }
        if (markup.substr(i).starts_with("<![CDATA[")) {
            const auto end = markup.find("]]>", i + 9);
            const auto body = markup.substr(i + 9, end == std::string_view::npos ? std::string_view::npos : end - i - 9);
            if (skip_depth == 0) builder.text(body);
            i = end == std::string_view::npos ? markup.size() : end + 3;
            continue;
        }
        if (i + 1 < markup.size() && (markup[i + 1] == '!' || markup[i + 1] == '?')) {
            const auto end = markup.find('>', i);
            i = end == std::string_view::npos ? markup.size() : end + 1;
            continue;
        }
        auto tag = parse_tag(markup, i);
        if (!tag) {
            if (skip_depth == 0) builder.text("<");
            ++i;
            continue;
        }
        i = tag->end;
        const std::string& name = tag->name;

        if (!tag->closing && is_raw_text_element(name)) {
            // Content is opaque up to the close tag; never parse it as markup.
            const auto close = ifind(markup, "</" + name, i);
            if (close == std::string_view::npos) {
                i = markup.size();
            } else {
                const auto gt = markup.find('>', close);
                i = gt == std::string_view::npos ? markup.size() : gt + 1;
            }
            if (name == "textarea" && skip_depth == 0) builder.line_break();
            continue;
        }

        if (type == MediaType::html && is_skipped_element(name)) {
            if (!tag->closing && !tag->self_closing) {
                ++skip_depth;
                skip_stack.push_back(name);
            } else if (tag->closing) {
                auto it = std::find(skip_stack.rbegin(), skip_stack.rend(), name);
                if (it != skip_stack.rend()) {
                    skip_stack.erase(std::next(it).base(), skip_stack.end());
                    skip_depth = static_cast<int>(skip_stack.size());
                }
            }
            continue;
        }
        if (skip_depth > 0) continue;

        if (type == MediaType::html && name == "a") {
            if (tag->closing) {
                close_anchor();
            } else {
                close_anchor();
                if (auto href = tag->attributes.find("href"); href != tag->attributes.end()) {
                    anchor = OpenAnchor{href->second, builder.size()};
                }
            }
            continue;
        }

        const int level = type == MediaType::html ? heading_level(name) : 0;
        if (level > 0) {
            builder.line_break();
            if (!tag->closing) {
                starts.push_back({builder.size(), {}});
                heading_open = true;
                heading_text = builder.size();
                heading_section = starts.size() - 1;
            } else if (heading_open) {
                std::string base = slugify(builder.str().substr(heading_text));
                std::string id = base;
                for (int n = 2; !used_ids.insert(id).second; ++n) id = base + "-" + std::to_string(n);
                starts[heading_section].id = id;
                heading_open = false;
            }
            continue;
        }

        if (type == MediaType::xml || is_block_element(name)) builder.line_break();
    }
    close_anchor();
    builder.line_break();

    // An unterminated heading still needs an id.
    for (auto& s : starts) {
        if (s.id.empty()) {
            std::string id = "section";
            for (int n = 2; !used_ids.insert(id).second; ++n) id = "section-" + std::to_string(n);
            s.id = id;
        }
    }

    doc.text = builder.take();
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const std::size_t b = starts[k].offset;
        const std::size_t e = k + 1 < starts.size() ? starts[k + 1].offset : doc.text.size();
        if (e > b) doc.sections.push_back({starts[k].id, doc.text.substr(b, e - b)});
    }
    return doc;
}

std::pair<std::string, std::vector<Section>> extract_text_and_sections(std::string_view markup,
                                                                       MediaType type) {
    auto doc = extract_document(markup, type, "");
    return {std::move(doc.text), std::move(doc.sections)};
}

}  // namespace wise
