#include "ipp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ipp/export.hpp"

namespace ipp {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& s) {
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

// A "nice" tick step covering `span` with roughly `target` intervals.
double tick_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;

    void widen() {
        if (!(hi > lo)) {
            const double pad = std::max(1.0, std::abs(lo) * 0.05);
            lo -= pad;
            hi += pad;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

std::string num(double v) { return format_number(v, 6); }

} // namespace

std::string render_impact_svg(const std::string& title, const std::vector<ScatterSeries>& series,
                              const std::vector<EllipseOverlay>& ellipses) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Axis ax{inf, -inf}, ay{inf, -inf};
    auto include = [&](double x, double y) {
        ax.lo = std::min(ax.lo, x);
        ax.hi = std::max(ax.hi, x);
        ay.lo = std::min(ay.lo, y);
        ay.hi = std::max(ay.hi, y);
    };
    for (const ScatterSeries& s : series) {
        for (const ImpactPoint& p : s.points) {
            include(p.x, p.y);
        }
    }
    for (const EllipseOverlay& e : ellipses) {
        const double r = e.ellipse.semi_major;
        include(e.ellipse.cx - r, e.ellipse.cy - r);
        include(e.ellipse.cx + r, e.ellipse.cy + r);
    }
    if (!std::isfinite(ax.lo)) {
        ax = {0.0, 1.0};
        ay = {0.0, 1.0};
    }
    ax.widen();
    ay.widen();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n"
        << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
        << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << escape(title) << "</text>\n";

    // Axes with ticks.
    out << "<g stroke=\"#444\" fill=\"none\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop)
        << "\" width=\"" << num(pw) << "\" height=\"" << num(ph) << "\"/></g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
    const double sx = tick_step(ax.hi - ax.lo, 8);
    for (double t = std::ceil(ax.lo / sx) * sx; t <= ax.hi; t += sx) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(t))
            << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"#444\"/>"
            << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 18)
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    const double sy = tick_step(ay.hi - ay.lo, 6);
    for (double t = std::ceil(ay.lo / sy) * sy; t <= ay.hi; t += sy) {
        out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft)
            << "\" y2=\"" << num(py(t)) << "\" stroke=\"#444\"/>"
            << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4)
            << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15)
        << "\" text-anchor=\"middle\">x [ft]</text>\n"
        << "<text x=\"20\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << num(kTop + ph / 2) << ")\">y [ft]</text>\n</g>\n";

    for (const ScatterSeries& s : series) {
        out << "<g stroke=\"" << escape(s.color) << "\" stroke-width=\"1\">\n";
        for (const ImpactPoint& p : s.points) {
            const double x = px(p.x), y = py(p.y);
            out << "<path class=\"marker\" d=\"M" << num(x - 3) << ' ' << num(y - 3) << "L" << num(x + 3)
                << ' ' << num(y + 3) << "M" << num(x - 3) << ' ' << num(y + 3) << "L" << num(x + 3) << ' '
                << num(y - 3) << "\"/>\n";
        }
        out << "</g>\n";
    }

    // Ellipses as polylines so the y-axis flip and unequal scales are exact.
    for (const EllipseOverlay& e : ellipses) {
        const Ellipse& el = e.ellipse;
        out << "<polygon class=\"ellipse\" fill=\"none\" stroke=\"" << escape(e.color)
            << "\" stroke-width=\"2\" points=\"";
        constexpr int kSegments = 96;
        for (int k = 0; k < kSegments; ++k) {
            const double t = 2.0 * std::numbers::pi * k / kSegments;
            const double a = el.semi_major * std::cos(t);
            const double b = el.semi_minor * std::sin(t);
            const double x = el.cx + a * std::cos(el.angle) - b * std::sin(el.angle);
            const double y = el.cy + a * std::sin(el.angle) + b * std::cos(el.angle);
            out << (k ? " " : "") << num(px(x)) << ',' << num(py(y));
        }
        out << "\"/>\n";
    }

    // Legend.
    double ly = kTop + 15;
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    auto legend = [&](const std::string& color, const std::string& label) {
        if (label.empty()) {
            return;
        }
        out << "<rect x=\"" << num(kLeft + pw - 190) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
            << escape(color) << "\"/><text x=\"" << num(kLeft + pw - 174) << "\" y=\"" << num(ly) << "\">"
            << escape(label) << "</text>\n";
        ly += 16;
    };
    for (const ScatterSeries& s : series) {
        legend(s.color, s.label);
    }
    for (const EllipseOverlay& e : ellipses) {
        legend(e.color, e.label);
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

} // namespace ipp
