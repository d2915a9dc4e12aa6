#pragma once

// Standalone SVG rendering of expected-performance curves.
//
// Every curve, band, reference line and crossover marker carries its data
// coordinates in data-* attributes next to the pixel geometry, so the
// document can be checked numerically without rasterizing it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "showwork/budget.hpp"
#include "showwork/error.hpp"
#include "showwork/estimator.hpp"
#include "showwork/format.hpp"

namespace showwork {

struct ReferenceLine {
    double value;
    std::string label;
};

struct FigureOptions {
    /// Shaded +/- 1 std band; defaults to on for a single curve, off otherwise.
    std::optional<bool> band;
    bool log_x = false;
    std::vector<ReferenceLine> references;
    /// Budgets (in axis units) to mark with vertical guides.
    std::vector<double> crossovers;
    std::string title;
    std::string y_label = "expected validation performance";
    int width = 720;
    int height = 440;
};

/// Parses "<value>:<label>" (label optional).
inline ReferenceLine parse_reference(std::string_view text) {
    const auto colon = text.find(':');
    auto value = parse_real(text.substr(0, colon));
    if (!value) throw ParseError("reference must look like <value>:<label>, got '" + std::string(text) + "'");
    return {*value, colon == std::string_view::npos ? std::string() : std::string(text.substr(colon + 1))};
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string px(double v) { return format_fixed(v, 3); }

struct Tick {
    double value;
    std::string label;
};

/// Round-number ticks (1, 2 or 5 times a power of ten) covering [lo, hi].
inline std::vector<Tick> nice_ticks(double lo, double hi, int target = 5) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {2.0, 5.0, 10.0})
        if (step < raw) step = m * mag;
    const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
    std::vector<Tick> out;
    for (double k = std::ceil(lo / step - 1e-9); k * step <= hi + step * 1e-9; k += 1.0)
        out.push_back({k * step, format_fixed(k * step, decimals)});
    return out;
}

/// Powers of ten inside [10^lo, 10^hi]; falls back to the endpoints.
inline std::vector<Tick> decade_ticks(double lo, double hi) {
    std::vector<Tick> out;
    for (double k = std::ceil(lo - 1e-9); k <= hi + 1e-9; k += 1.0)
        out.push_back({k, format_shortest(std::pow(10.0, k))});
    if (out.size() < 2) {
        out.clear();
        for (double e : {lo, hi}) out.push_back({e, format_shortest(std::round(std::pow(10.0, e) * 100) / 100)});
    }
    return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

/// Renders one polyline per curve. `axes` holds one budget axis shared by all
/// curves or one per curve. Bands are clipped to each family's observed
/// range. Throws DomainError for a log axis with non-positive budgets.
inline std::string render_curve_figure(std::span<const ExpectedMaxCurve> curves, std::span<const BudgetAxis> axes,
                                       const FigureOptions& opts = {}) {
    using detail::px;
    if (curves.empty()) throw DomainError("figure needs at least one curve");
    if (axes.size() != 1 && axes.size() != curves.size())
        throw DomainError("figure needs one budget axis or one per curve");
    for (const auto& c : curves)
        if (c.points.empty()) throw DomainError("curve for '" + c.family + "' is empty");
    const bool band = opts.band.value_or(curves.size() == 1);
    auto axis_of = [&](std::size_t i) -> const BudgetAxis& { return axes[axes.size() == 1 ? 0 : i]; };

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (const auto& p : curves[i].points) {
            const double x = axis_of(i).to_units(p.n);
            if (opts.log_x && !(x > 0.0))
                throw DomainError("log x-axis requires positive budgets (family '" + curves[i].family + "')");
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, p.expected_max);
            y_hi = std::max(y_hi, p.expected_max);
        }
        if (band) {
            y_lo = std::min(y_lo, curves[i].observed_min);
            y_hi = std::max(y_hi, curves[i].observed_max);
        }
    }
    for (const auto& r : opts.references) {
        y_lo = std::min(y_lo, r.value);
        y_hi = std::max(y_hi, r.value);
    }
    for (double c : opts.crossovers)
        if (opts.log_x && !(c > 0.0)) throw DomainError("log x-axis requires positive crossover budgets");

    auto tx = [&](double x) { return opts.log_x ? std::log10(x) : x; };
    double tx_lo = tx(x_lo), tx_hi = tx(x_hi);
    if (tx_hi == tx_lo) {
        tx_lo -= 0.5;
        tx_hi += 0.5;
    }
    if (y_hi == y_lo) {
        const double pad = y_lo == 0.0 ? 0.5 : std::abs(y_lo) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    } else {
        const double pad = (y_hi - y_lo) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    }

    const double left = 70, right = 170, top = 40, bottom = 50;
    const double plot_w = opts.width - left - right, plot_h = opts.height - top - bottom;
    auto sx = [&](double x) { return left + (tx(x) - tx_lo) / (tx_hi - tx_lo) * plot_w; };
    auto sy = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

    const BudgetUnit unit = axis_of(0).unit;
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) + "\" height=\"" +
           std::to_string(opts.height) + "\" viewBox=\"0 0 " + std::to_string(opts.width) + " " +
           std::to_string(opts.height) + "\" data-x-unit=\"" + to_string(unit) + "\" data-x-scale=\"" +
           (opts.log_x ? "log" : "linear") + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opts.width) + "\" height=\"" +
           std::to_string(opts.height) + "\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        svg += "<text x=\"" + px(left + plot_w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
               detail::xml_escape(opts.title) + "</text>\n";

    // Frame and ticks.
    svg += "<rect class=\"frame\" x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(plot_w) +
           "\" height=\"" + px(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    const auto x_ticks = opts.log_x ? detail::decade_ticks(tx_lo, tx_hi) : detail::nice_ticks(tx_lo, tx_hi);
    for (const auto& t : x_ticks) {
        const double xp = left + (t.value - tx_lo) / (tx_hi - tx_lo) * plot_w;
        svg += "<line class=\"tick\" x1=\"" + px(xp) + "\" y1=\"" + px(top + plot_h) + "\" x2=\"" + px(xp) +
               "\" y2=\"" + px(top + plot_h + 5) + "\" stroke=\"#444\"/>\n";
        svg += "<text x=\"" + px(xp) + "\" y=\"" + px(top + plot_h + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + t.label + "</text>\n";
    }
    for (const auto& t : detail::nice_ticks(y_lo, y_hi)) {
        const double yp = sy(t.value);
        svg += "<line class=\"tick\" x1=\"" + px(left - 5) + "\" y1=\"" + px(yp) + "\" x2=\"" + px(left) +
               "\" y2=\"" + px(yp) + "\" stroke=\"#444\"/>\n";
        svg += "<text x=\"" + px(left - 8) + "\" y=\"" + px(yp + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
               t.label + "</text>\n";
    }
    std::string x_label = "budget (" + to_string(unit) + ")";
    if (opts.log_x) x_label += ", log scale";
    svg += "<text x=\"" + px(left + plot_w / 2) + "\" y=\"" + px(opts.height - 8.0) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + detail::xml_escape(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + px(top + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"12\" " +
           "transform=\"rotate(-90 16 " + px(top + plot_h / 2) + ")\">" + detail::xml_escape(opts.y_label) +
           "</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const std::string color = detail::kPalette[i % std::size(detail::kPalette)];
        const std::string fam = detail::xml_escape(c.family);

        if (band) {
            // Upper edge left to right, then lower edge right to left.
            std::string dx, dy, pts;
            auto vertex = [&](double x, double y) {
                if (!dx.empty()) {
                    dx += ' ';
                    dy += ' ';
                    pts += ' ';
                }
                dx += format_g17(x);
                dy += format_g17(y);
                pts += px(sx(x)) + "," + px(sy(y));
            };
            for (const auto& p : c.points)
                vertex(axis_of(i).to_units(p.n), std::clamp(p.expected_max + p.std, c.observed_min, c.observed_max));
            for (auto it = c.points.rbegin(); it != c.points.rend(); ++it)
                vertex(axis_of(i).to_units(it->n),
                       std::clamp(it->expected_max - it->std, c.observed_min, c.observed_max));
            svg += "<polygon class=\"band\" data-family=\"" + fam + "\" data-x=\"" + dx + "\" data-y=\"" + dy +
                   "\" points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }

        std::string dx, dy, pts;
        for (const auto& p : c.points) {
            if (!dx.empty()) {
                dx += ' ';
                dy += ' ';
                pts += ' ';
            }
            const double x = axis_of(i).to_units(p.n);
            dx += format_g17(x);
            dy += format_g17(p.expected_max);
            pts += px(sx(x)) + "," + px(sy(p.expected_max));
        }
        svg += "<polyline class=\"curve\" data-family=\"" + fam + "\" data-x=\"" + dx + "\" data-y=\"" + dy +
               "\" points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";

        const double ly = top + 14 + 18 * static_cast<double>(i);
        svg += "<line class=\"legend\" x1=\"" + px(left + plot_w + 12) + "\" y1=\"" + px(ly) + "\" x2=\"" +
               px(left + plot_w + 36) + "\" y2=\"" + px(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + px(left + plot_w + 42) + "\" y=\"" + px(ly + 4) + "\" font-size=\"12\">" + fam +
               "</text>\n";
    }

    for (const auto& r : opts.references) {
        const double yp = sy(r.value);
        svg += "<line class=\"reference\" data-y=\"" + format_g17(r.value) + "\" x1=\"" + px(left) + "\" y1=\"" +
               px(yp) + "\" x2=\"" + px(left + plot_w) + "\" y2=\"" + px(yp) +
               "\" stroke=\"#000\" stroke-dasharray=\"6 4\"/>\n";
        if (!r.label.empty())
            svg += "<text x=\"" + px(left + plot_w - 4) + "\" y=\"" + px(yp - 4) +
                   "\" text-anchor=\"end\" font-size=\"11\">" + detail::xml_escape(r.label) + "</text>\n";
    }
    for (double c : opts.crossovers) {
        const double xp = sx(c);
        svg += "<line class=\"crossover\" data-x=\"" + format_g17(c) + "\" x1=\"" + px(xp) + "\" y1=\"" + px(top) +
               "\" x2=\"" + px(xp) + "\" y2=\"" + px(top + plot_h) + "\" stroke=\"#888\" stroke-dasharray=\"2 3\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline std::string render_curve_figure(std::span<const ExpectedMaxCurve> curves, const BudgetAxis& axis,
                                       const FigureOptions& opts = {}) {
    return render_curve_figure(curves, std::span<const BudgetAxis>(&axis, 1), opts);
}

}  // namespace showwork
