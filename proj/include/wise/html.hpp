#pragma once

// Markup to plain text. Boilerplate containers (script, style, nav, header,
// footer, aside, form, ...) are dropped, block elements become line breaks,
// and headings open new sections. The concatenation of section texts is
// exactly the returned plain text.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wise/core.hpp"

namespace wise {

enum class MediaType { html, xml, text };

/// From a Content-Type header value, falling back to the locator's extension.
MediaType media_type_for(std::string_view content_type, std::string_view uri = {});

struct ExtractedDocument {
    std::string text;
    std::vector<Section> sections;
    /// Resolved, deduplicated anchors; anchor_span points into `text`.
    std::vector<SourceRef> links;
};

/// Never fails: malformed markup is extracted best-effort.
ExtractedDocument extract_document(std::string_view markup, MediaType type, std::string_view base_uri);

std::pair<std::string, std::vector<Section>> extract_text_and_sections(std::string_view markup,
                                                                       MediaType type);

std::string decode_entities(std::string_view s);

}  // namespace wise
