#pragma once

#include "bspc/charts.hpp"

#include <string>

namespace bspc {

/// Stacked panels: the T2 chart, then one t chart per monitored coefficient.
/// Limits are drawn as dashed lines, signalling points in red, and a vertical
/// rule separates the reference batches from the new ones.
std::string render_chart_svg(const ChartReport& report);

}  // namespace bspc
