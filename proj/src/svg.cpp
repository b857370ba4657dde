#include "bspc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bspc {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 180.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kPanelGap = 40.0;
constexpr double kTop = 30.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Panel {
    std::string title;
    std::vector<double> values;
    std::vector<bool> signal;
    std::vector<bool> valid;
    double upper;
    bool two_sided;
};

void draw_panel(std::ostringstream& out, const Panel& panel, double top, std::size_t boundary) {
    const std::size_t n = panel.values.size();
    double hi = panel.upper;
    for (std::size_t i = 0; i < n; ++i)
        if (panel.valid[i]) hi = std::max(hi, std::abs(panel.values[i]));
    hi *= 1.1;
    const double lo = panel.two_sided ? -hi : 0.0;
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    auto x_at = [&](std::size_t i) { return kMarginLeft + (n > 1 ? plot_w * double(i) / double(n - 1) : plot_w / 2); };
    auto y_at = [&](double v) { return top + kPanelHeight * (hi - v) / (hi - lo); };

    out << "<g>\n";
    out << "<text x=\"" << num(kMarginLeft) << "\" y=\"" << num(top - 8) << "\" font-size=\"13\">" << panel.title
        << "</text>\n";
    out << "<rect x=\"" << num(kMarginLeft) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
        << "\" height=\"" << num(kPanelHeight) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    auto hline = [&](double v, const char* style) {
        out << "<line x1=\"" << num(kMarginLeft) << "\" x2=\"" << num(kMarginLeft + plot_w) << "\" y1=\"" << num(y_at(v))
            << "\" y2=\"" << num(y_at(v)) << "\" " << style << "/>\n";
        out << "<text x=\"" << num(kMarginLeft - 6) << "\" y=\"" << num(y_at(v) + 4)
            << "\" font-size=\"10\" text-anchor=\"end\">" << num(v) << "</text>\n";
    };
    hline(panel.upper, "stroke=\"#c00\" stroke-dasharray=\"6,4\"");
    if (panel.two_sided) {
        hline(-panel.upper, "stroke=\"#c00\" stroke-dasharray=\"6,4\"");
        hline(0.0, "stroke=\"#999\"");
    }
    if (boundary > 0 && boundary < n) {
        const double xb = (x_at(boundary - 1) + x_at(boundary)) / 2;
        out << "<line x1=\"" << num(xb) << "\" x2=\"" << num(xb) << "\" y1=\"" << num(top) << "\" y2=\""
            << num(top + kPanelHeight) << "\" stroke=\"#06c\" stroke-dasharray=\"2,3\"/>\n";
    }
    std::string path;
    for (std::size_t i = 0; i < n; ++i) {
        if (!panel.valid[i]) continue;
        path += (path.empty() ? "M" : " L") + num(x_at(i)) + "," + num(y_at(panel.values[i]));
    }
    if (!path.empty()) out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
        if (!panel.valid[i]) continue;
        out << "<circle cx=\"" << num(x_at(i)) << "\" cy=\"" << num(y_at(panel.values[i])) << "\" r=\""
            << (panel.signal[i] ? "3.5\" fill=\"#d00\"" : "2\" fill=\"#333\"") << "/>\n";
    }
    out << "</g>\n";
}

}  // namespace

std::string render_chart_svg(const ChartReport& report) {
    std::vector<Panel> panels;
    const std::size_t n = report.records.size();
    Panel t2{"T2", {}, {}, {}, 0.0, false};
    std::vector<Panel> tp;
    for (const auto& name : report.coef_names) tp.push_back({"t " + name, {}, {}, {}, 0.0, true});
    for (const auto& r : report.records) {
        t2.values.push_back(r.t2_score);
        t2.signal.push_back(r.signals.t2);
        t2.valid.push_back(r.monitorable && std::isfinite(r.t2_score));
        t2.upper = std::max(t2.upper, r.t2_limit);
        for (std::size_t j = 0; j < tp.size(); ++j) {
            const bool ok = r.monitorable && j < r.t_scores.size() && std::isfinite(r.t_scores[j]);
            tp[j].values.push_back(ok ? r.t_scores[j] : 0.0);
            tp[j].signal.push_back(ok && j < r.signals.t.size() && r.signals.t[j]);
            tp[j].valid.push_back(ok);
            tp[j].upper = std::max(tp[j].upper, r.t_limit);
        }
    }
    panels.push_back(std::move(t2));
    for (auto& p : tp) panels.push_back(std::move(p));

    const double height = kTop + double(panels.size()) * (kPanelHeight + kPanelGap) + 10.0;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(height)
        << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t k = 0; k < panels.size(); ++k)
        draw_panel(out, panels[k], kTop + double(k) * (kPanelHeight + kPanelGap), report.reference_batches);
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(height - 4)
        << "\" font-size=\"11\" text-anchor=\"middle\">batch (" << n << " total, " << report.reference_batches
        << " reference)</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace bspc
