#pragma once

#include <string>
#include <vector>

#include "ipp/sde.hpp"

namespace ipp {

struct ScatterSeries {
    std::vector<ImpactPoint> points;
    std::string color = "#1f77b4";
    std::string label;
};

struct EllipseOverlay {
    Ellipse ellipse;
    std::string color = "#d62728";
    std::string label;
};

/**
 * @brief Impact scatter with 1-sigma ellipses on a fixed 800x600 canvas.
 *
 * Each point becomes one `<path class="marker">` cross; axes scale to cover
 * every point and ellipse.
 */
std::string render_impact_svg(const std::string& title, const std::vector<ScatterSeries>& series,
                              const std::vector<EllipseOverlay>& ellipses);

} // namespace ipp
