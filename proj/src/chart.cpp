#include "imb/chart.hpp"

#include "imb/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace imb {
namespace {

std::string workload_label(const ReportRow& r) {
    return r.pattern + "/" + human_count(r.scale) + " " + r.mix;
}

double value_or_nan(const std::optional<double>& v) {
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                          "#59a14f", "#edc948", "#b07aa1"};

ChartModel grouped_model(const std::vector<ReportRow>& rows, const char* title,
                         const char* axis, std::optional<double> ReportRow::*metric) {
    ChartModel m;
    m.title = title;
    m.value_axis = axis;

    std::vector<std::string> indexes;
    for (const auto& r : rows) {
        std::string label = workload_label(r);
        if (std::find(m.groups.begin(), m.groups.end(), label) == m.groups.end())
            m.groups.push_back(label);
        if (std::find(indexes.begin(), indexes.end(), r.index) == indexes.end())
            indexes.push_back(r.index);
    }
    for (const auto& index : indexes) {
        ChartSeries s;
        s.label = index;
        s.values.assign(m.groups.size(), std::numeric_limits<double>::quiet_NaN());
        m.series.push_back(std::move(s));
    }
    for (const auto& r : rows) {
        auto g = std::find(m.groups.begin(), m.groups.end(), workload_label(r)) - m.groups.begin();
        auto s = std::find(indexes.begin(), indexes.end(), r.index) - indexes.begin();
        m.series[s].values[g] = value_or_nan(r.*metric);
    }
    return m;
}

ChartModel stacked_model(const std::vector<ReportRow>& rows, const char* title,
                         std::initializer_list<std::pair<const char*, std::optional<double> ReportRow::*>>
                             components) {
    ChartModel m;
    m.title = title;
    m.value_axis = "share of pipeline slots";
    m.stacked = true;
    for (const auto& r : rows) m.groups.push_back(r.index + " " + workload_label(r));
    for (const auto& [label, member] : components) {
        ChartSeries s;
        s.label = label;
        for (const auto& r : rows) s.values.push_back(value_or_nan(r.*member));
        m.series.push_back(std::move(s));
    }
    return m;
}

}  // namespace

const char* to_string(ChartKind kind) {
    switch (kind) {
        case ChartKind::ExecTime: return "exec_time";
        case ChartKind::InstrPerRequest: return "instr";
        case ChartKind::Cpi: return "cpi";
        case ChartKind::Level1: return "level1";
        case ChartKind::Backend: return "backend";
        case ChartKind::Memory: return "memory";
    }
    return "?";
}

ChartKind chart_kind_from_string(const std::string& name) {
    for (ChartKind kind : all_chart_kinds()) {
        if (name == to_string(kind)) return kind;
    }
    throw std::invalid_argument("unknown chart kind: " + name);
}

const std::vector<ChartKind>& all_chart_kinds() {
    static const std::vector<ChartKind> kinds = {ChartKind::ExecTime, ChartKind::InstrPerRequest,
                                                 ChartKind::Cpi,      ChartKind::Level1,
                                                 ChartKind::Backend,  ChartKind::Memory};
    return kinds;
}

ChartModel build_chart_model(ChartKind kind, const std::vector<ReportRow>& rows) {
    switch (kind) {
        case ChartKind::ExecTime:
            return grouped_model(rows, "Average request time", "microseconds per request",
                                 &ReportRow::avg_exec_time_us);
        case ChartKind::InstrPerRequest:
            return grouped_model(rows, "Instructions per request", "instructions",
                                 &ReportRow::instr_per_request);
        case ChartKind::Cpi:
            return grouped_model(rows, "Cycles per instruction", "cpi", &ReportRow::cpi);
        case ChartKind::Level1:
            return stacked_model(rows, "Pipeline slot attribution",
                                 {{"retiring", &ReportRow::retiring},
                                  {"bad_speculation", &ReportRow::bad_speculation},
                                  {"frontend_bound", &ReportRow::frontend_bound},
                                  {"backend_bound", &ReportRow::backend_bound}});
        case ChartKind::Backend:
            return stacked_model(rows, "Backend split",
                                 {{"core_bound", &ReportRow::core_bound},
                                  {"memory_bound", &ReportRow::memory_bound}});
        case ChartKind::Memory:
            return stacked_model(rows, "Memory tier attribution",
                                 {{"l1_bound", &ReportRow::l1_bound},
                                  {"l2_bound", &ReportRow::l2_bound},
                                  {"l3_bound", &ReportRow::l3_bound},
                                  {"dram_bound", &ReportRow::dram_bound},
                                  {"store_bound", &ReportRow::store_bound}});
    }
    throw std::invalid_argument("unknown chart kind");
}

std::string render_svg(const ChartModel& model) {
    const std::size_t group_count = model.groups.size();
    const std::size_t series_count = model.series.size();

    const double bar_w = 14.0;
    const double group_pad = 14.0;
    const double group_w =
        model.stacked ? bar_w + group_pad
                      : bar_w * static_cast<double>(series_count) + group_pad;
    const double ml = 80.0, mt = 50.0, mb = 110.0, legend_w = 170.0;
    const double plot_w = std::max(200.0, group_w * static_cast<double>(group_count));
    const double plot_h = 300.0;
    const double width = ml + plot_w + legend_w;
    const double height = mt + plot_h + mb;

    // Scale to the tallest bar or stack.
    double peak = 0.0;
    for (std::size_t g = 0; g < group_count; ++g) {
        double stack = 0.0;
        for (const auto& s : model.series) {
            double v = g < s.values.size() ? s.values[g] : 0.0;
            if (std::isnan(v)) continue;
            if (model.stacked) stack += v;
            else peak = std::max(peak, v);
        }
        if (model.stacked) peak = std::max(peak, stack);
    }
    if (peak <= 0.0) peak = 1.0;
    const double y_max = peak * 1.05;
    auto y_of = [&](double v) { return mt + plot_h - v / y_max * plot_h; };

    std::ostringstream out;
    char buf[512];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">%s</text>\n",
                  ml + plot_w / 2, escape(model.title).c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"18\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 18 %.1f)\">%s</text>\n",
                  mt + plot_h / 2, mt + plot_h / 2, escape(model.value_axis).c_str());
    out << buf;

    for (int tick = 0; tick <= 5; ++tick) {
        double v = y_max * tick / 5.0;
        double y = y_of(v);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n",
                      ml, y, ml + plot_w, y);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                      ml - 6, y + 3, v);
        out << buf;
    }

    for (std::size_t g = 0; g < group_count; ++g) {
        double gx = ml + group_w * static_cast<double>(g) + group_pad / 2;
        if (model.stacked) {
            double base = 0.0;
            for (std::size_t s = 0; s < series_count; ++s) {
                double v = g < model.series[s].values.size() ? model.series[s].values[g] : 0.0;
                if (std::isnan(v) || v <= 0.0) continue;
                double y1 = y_of(base + v);
                double y0 = y_of(base);
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                              "fill=\"%s\"/>\n",
                              gx, y1, bar_w, y0 - y1, kPalette[s % 7]);
                out << buf;
                base += v;
            }
        } else {
            for (std::size_t s = 0; s < series_count; ++s) {
                double v = g < model.series[s].values.size() ? model.series[s].values[g] : 0.0;
                if (std::isnan(v) || v <= 0.0) continue;
                double x = gx + bar_w * static_cast<double>(s);
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                              "fill=\"%s\"/>\n",
                              x, y_of(v), bar_w - 1.0, mt + plot_h - y_of(v), kPalette[s % 7]);
                out << buf;
            }
        }
        double label_x = gx + (model.stacked ? bar_w : bar_w * static_cast<double>(series_count)) / 2;
        double label_y = mt + plot_h + 14;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"9\" text-anchor=\"end\" "
                      "transform=\"rotate(-38 %.1f %.1f)\">%s</text>\n",
                      label_x, label_y, label_x, label_y, escape(model.groups[g]).c_str());
        out << buf;
    }

    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>\n", ml,
                  mt + plot_h, ml + plot_w, mt + plot_h);
    out << buf;

    for (std::size_t s = 0; s < series_count; ++s) {
        double y = mt + 12 + 18 * static_cast<double>(s);
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" fill=\"%s\"/>\n",
                      ml + plot_w + 18, y - 10, kPalette[s % 7]);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%s</text>\n",
                      ml + plot_w + 36, y, escape(model.series[s].label).c_str());
        out << buf;
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace imb
