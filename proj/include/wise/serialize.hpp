#pragma once

// JSON schema for the core types. Field names match the struct members;
// token sets are emitted as sorted arrays so output is byte-stable.

#include <nlohmann/json.hpp>

#include "wise/core.hpp"

namespace wise {

using nlohmann::json;

void to_json(json& j, const Query& q);
void from_json(const json& j, Query& q);
void to_json(json& j, const TextSpan& s);
void from_json(const json& j, TextSpan& s);
void to_json(json& j, const SourceRef& s);
void from_json(const json& j, SourceRef& s);
void to_json(json& j, const Section& s);
void from_json(const json& j, Section& s);
void to_json(json& j, const RawContent& r);
void from_json(const json& j, RawContent& r);
void to_json(json& j, const Segment& s);
void from_json(const json& j, Segment& s);
void to_json(json& j, const FilteredContent& f);
void to_json(json& j, const ContainerSegment& s);
void from_json(const json& j, ContainerSegment& s);
void to_json(json& j, const KnowledgeContainer& k);
void from_json(const json& j, KnowledgeContainer& k);
void to_json(json& j, const SourceScore& s);
void from_json(const json& j, SourceScore& s);
void to_json(json& j, const EngineConfig& c);
/// Missing keys keep their defaults, so partial config files are allowed.
void from_json(const json& j, EngineConfig& c);
void to_json(json& j, const SourceOutcome& o);
void from_json(const json& j, SourceOutcome& o);
void to_json(json& j, const LayerRecord& l);
void from_json(const json& j, LayerRecord& l);
void to_json(json& j, const RunTrace& t);
void from_json(const json& j, RunTrace& t);

/// Two-space indented dump with a trailing newline.
std::string dump_pretty(const json& j);

}  // namespace wise
