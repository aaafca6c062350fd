#pragma once

// JSON mappings for every persisted or transmitted domain type. Documents
// written by the store carry "schema_version": kSchemaVersion.

#include <nlohmann/json.hpp>

#include "fusion/autocomplete.hpp"
#include "fusion/explorer.hpp"
#include "fusion/primer.hpp"
#include "fusion/report.hpp"

namespace fusion {

inline constexpr int kSchemaVersion = 1;

void to_json(nlohmann::json& j, const Rect& v);
void from_json(const nlohmann::json& j, Rect& v);
void to_json(nlohmann::json& j, const InstanceRef& v);
void from_json(const nlohmann::json& j, InstanceRef& v);
void to_json(nlohmann::json& j, const Action& v);
void from_json(const nlohmann::json& j, Action& v);
void to_json(nlohmann::json& j, const BlobRef& v);
void from_json(const nlohmann::json& j, BlobRef& v);

void to_json(nlohmann::json& j, const ComponentDescriptor& v);
void from_json(const nlohmann::json& j, ComponentDescriptor& v);
void to_json(nlohmann::json& j, const ComponentUniverse& v);
void from_json(const nlohmann::json& j, ComponentUniverse& v);

void to_json(nlohmann::json& j, const ComponentInstance& v);
void from_json(const nlohmann::json& j, ComponentInstance& v);
void to_json(nlohmann::json& j, const Screen& v);
void from_json(const nlohmann::json& j, Screen& v);
void to_json(nlohmann::json& j, const TraceStep& v);
void from_json(const nlohmann::json& j, TraceStep& v);
void to_json(nlohmann::json& j, const Edge& v);
void from_json(const nlohmann::json& j, Edge& v);
/// Graph without its trace; the trace is stored separately.
void to_json(nlohmann::json& j, const EventFlowGraph& v);
void from_json(const nlohmann::json& j, EventFlowGraph& v);

void to_json(nlohmann::json& j, const ReporterMetadata& v);
void from_json(const nlohmann::json& j, ReporterMetadata& v);
void to_json(nlohmann::json& j, const Resolution& v);
void from_json(const nlohmann::json& j, Resolution& v);
void to_json(nlohmann::json& j, const ReportStep& v);
void from_json(const nlohmann::json& j, ReportStep& v);
void to_json(nlohmann::json& j, const Session& v);
void from_json(const nlohmann::json& j, Session& v);
void to_json(nlohmann::json& j, const Suggestion& v);
void to_json(nlohmann::json& j, const ComponentChoice& v);
void to_json(nlohmann::json& j, const Confirmation& v);

void to_json(nlohmann::json& j, const BugReport& v);
void from_json(const nlohmann::json& j, BugReport& v);
void to_json(nlohmann::json& j, const ReplayEntry& v);
void from_json(const nlohmann::json& j, ReplayEntry& v);
void to_json(nlohmann::json& j, const ReplayScript& v);
void from_json(const nlohmann::json& j, ReplayScript& v);

nlohmann::json trace_to_json(const std::vector<TraceStep>& trace);
std::vector<TraceStep> trace_from_json(const nlohmann::json& j);

}  // namespace fusion
