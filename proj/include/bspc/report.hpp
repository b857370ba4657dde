#pragma once

#include "bspc/application.hpp"
#include "bspc/charts.hpp"
#include "bspc/dataset.hpp"
#include "bspc/diagnostics.hpp"
#include "bspc/mc.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace bspc {

using Json = nlohmann::ordered_json;

Json to_json(const ChartRecord& rec, const std::vector<std::string>& names);
Json to_json(const ChartReport& report);
Json to_json(const CellRecord& cell);
Json to_json(const RunSummary& summary);
Json to_json(const DatasetManifest& manifest);
Json to_json(const ScreeningResult& screening, const ArmaShape& shape);
Json to_json(const ResidualAdequacy& adequacy);
Json to_json(const ApplicationResult& result);
Json reference_summary(const PhaseIReference& ref);

/// Versioned, field-tagged text form of a Phase I reference. Doubles are
/// written in shortest round-trip form so a reload scores identically.
std::string serialize_reference(const PhaseIReference& ref);
PhaseIReference parse_reference(std::string_view text);
void save_reference(const std::filesystem::path& path, const PhaseIReference& ref);
PhaseIReference load_reference(const std::filesystem::path& path);

/// Mean/sd ARL table laid out with one row per (level, T) and a column group per I.
std::string summary_table(const RunSummary& summary);
/// Mean/sd of r0 and r1 with one row per I and a column group per alpha.
std::string application_table(const ApplicationResult& result);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace bspc
