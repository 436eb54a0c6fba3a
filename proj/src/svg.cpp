#include "trajsr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace trajsr::svg {

namespace {

const char* kPalette[] = {"#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&') {
            out += "&amp;";
        } else if (c == '<') {
            out += "&lt;";
        } else if (c == '>') {
            out += "&gt;";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string edge_label(double e) {
    if (std::isinf(e)) return "inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%g", e);
    return buf;
}

}  // namespace

std::string histogram_svg(const std::vector<metrics::EvalReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("histogram_svg: no reports");
    const std::vector<double>& edges = reports[0].bin_edges_km;
    for (const auto& r : reports) {
        if (r.bin_edges_km != edges) throw std::invalid_argument("histogram_svg: reports use different bins");
    }
    size_t n_bins = reports[0].counts.size();

    constexpr double width = 900.0, height = 420.0;
    constexpr double ml = 60.0, mr = 20.0, mt = 40.0, mb = 60.0;
    double plot_w = width - ml - mr;
    double plot_h = height - mt - mb;

    size_t max_count = 1;
    for (const auto& r : reports)
        for (size_t c : r.counts) max_count = std::max(max_count, c);

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt(ml) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">Frechet error histogram (km)</text>\n";

    // axes
    out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt + plot_h) + "\" x2=\"" + fmt(ml + plot_w) + "\" y2=\"" +
           fmt(mt + plot_h) + "\" stroke=\"#333\"/>\n";
    out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" + fmt(mt + plot_h) +
           "\" stroke=\"#333\"/>\n";

    double bin_w = plot_w / static_cast<double>(n_bins);
    double bar_w = bin_w / static_cast<double>(reports.size() + 1);
    for (size_t b = 0; b < n_bins; ++b) {
        double x0 = ml + static_cast<double>(b) * bin_w;
        for (size_t r = 0; r < reports.size(); ++r) {
            double h = plot_h * static_cast<double>(reports[r].counts[b]) / static_cast<double>(max_count);
            double x = x0 + bar_w * (0.5 + static_cast<double>(r));
            out += "<rect class=\"bar\" x=\"" + fmt(x) + "\" y=\"" + fmt(mt + plot_h - h) + "\" width=\"" +
                   fmt(bar_w) + "\" height=\"" + fmt(h) + "\" fill=\"" +
                   kPalette[r % kPaletteSize] + "\"/>\n";
        }
        // x tick label on every 2nd edge to avoid clutter
        if (b % 2 == 0) {
            out += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(mt + plot_h + 16.0) +
                   "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" +
                   edge_label(edges[b]) + "</text>\n";
        }
    }
    // the overflow edge always gets a label
    out += "<text x=\"" + fmt(ml + plot_w) + "\" y=\"" + fmt(mt + plot_h + 16.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" +
           edge_label(edges[n_bins]) + "</text>\n";
    // y max label
    out += "<text x=\"" + fmt(ml - 8.0) + "\" y=\"" + fmt(mt + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + std::to_string(max_count) +
           "</text>\n";
    out += "<text x=\"" + fmt(ml - 8.0) + "\" y=\"" + fmt(mt + plot_h) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">0</text>\n";

    // legend
    double ly = mt + 6.0;
    for (size_t r = 0; r < reports.size(); ++r) {
        double lx = ml + plot_w - 180.0;
        out += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(ly - 9.0) + "\" width=\"12\" height=\"12\" fill=\"" +
               kPalette[r % kPaletteSize] + "\"/>\n";
        out += "<text x=\"" + fmt(lx + 18.0) + "\" y=\"" + fmt(ly + 2.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(reports[r].label) + "</text>\n";
        ly += 18.0;
    }
    out += "</svg>\n";
    return out;
}

std::string overlay_svg(const std::vector<std::pair<std::string, Trajectory>>& layers) {
    if (layers.empty()) throw std::invalid_argument("overlay_svg: no trajectories");
    double lo_lat = 1e300, hi_lat = -1e300, lo_lon = 1e300, hi_lon = -1e300;
    for (const auto& [label, traj] : layers) {
        if (traj.empty()) throw std::invalid_argument("overlay_svg: empty trajectory for layer " + label);
        for (const auto& p : traj.points) {
            lo_lat = std::min(lo_lat, p.pos.lat);
            hi_lat = std::max(hi_lat, p.pos.lat);
            lo_lon = std::min(lo_lon, p.pos.lon);
            hi_lon = std::max(hi_lon, p.pos.lon);
        }
    }
    double span_lat = std::max(hi_lat - lo_lat, 1e-9);
    double span_lon = std::max(hi_lon - lo_lon, 1e-9);

    constexpr double width = 800.0, height = 600.0, margin = 50.0;
    double usable_w = width - 2 * margin;
    double usable_h = height - 2 * margin;
    // Equal-aspect in degrees, corrected for longitude shrink at latitude.
    double lon_scale_deg = std::cos((lo_lat + hi_lat) / 2.0 * 3.141592653589793 / 180.0);
    double scale = std::min(usable_w / (span_lon * lon_scale_deg), usable_h / span_lat);
    double cx = margin + usable_w / 2.0, cy = margin + usable_h / 2.0;

    auto to_xy = [&](double lat, double lon) {
        double x = cx + (lon - (lo_lon + hi_lon) / 2.0) * lon_scale_deg * scale;
        double y = cy - (lat - (lo_lat + hi_lat) / 2.0) * scale;
        return std::make_pair(x, y);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt(margin) + "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\">Trajectory overlay</text>\n";

    for (size_t i = 0; i < layers.size(); ++i) {
        const auto& [label, traj] = layers[i];
        const char* color = kPalette[i % kPaletteSize];
        std::string points;
        for (const auto& p : traj.points) {
            auto [x, y] = to_xy(p.pos.lat, p.pos.lon);
            if (!points.empty()) points += " ";
            points += fmt(x) + "," + fmt(y);
        }
        out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        for (const auto& p : traj.points) {
            auto [x, y] = to_xy(p.pos.lat, p.pos.lon);
            out += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }
        double ly = margin + 16.0 * static_cast<double>(i);
        out += "<rect x=\"" + fmt(width - margin - 160.0) + "\" y=\"" + fmt(ly - 9.0) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(color) + "\"/>\n";
        out += "<text x=\"" + fmt(width - margin - 142.0) + "\" y=\"" + fmt(ly + 2.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace trajsr::svg
