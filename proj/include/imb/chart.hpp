#pragma once

#include <string>
#include <vector>

#include "imb/report.hpp"

namespace imb {

// Bar chart description decoupled from SVG rendering. Grouped charts draw
// one bar per series within each group; stacked charts pile the series on
// top of each other instead.
struct ChartSeries {
    std::string label;
    std::vector<double> values;  // one per group; NaN draws no bar segment
};

struct ChartModel {
    std::string title;
    std::string value_axis;
    std::vector<std::string> groups;
    std::vector<ChartSeries> series;
    bool stacked = false;
};

enum class ChartKind : std::uint8_t {
    ExecTime,         // grouped: avg request time per index
    InstrPerRequest,  // grouped
    Cpi,              // grouped
    Level1,           // stacked slot attribution per run
    Backend,          // stacked core/memory split per run
    Memory,           // stacked memory tier shares per run
};

const char* to_string(ChartKind kind);
ChartKind chart_kind_from_string(const std::string& name);  // throws
const std::vector<ChartKind>& all_chart_kinds();

ChartModel build_chart_model(ChartKind kind, const std::vector<ReportRow>& rows);

std::string render_svg(const ChartModel& model);

}  // namespace imb
