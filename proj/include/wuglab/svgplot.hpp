#pragma once

#include <string>
#include <vector>

#include "wuglab/geometry.hpp"

namespace wuglab {

struct MovementPlotData {
    std::string title;
    std::string label_first;
    std::string label_second;
    std::vector<Point2> exemplars_first;
    std::vector<Point2> exemplars_second;
    std::vector<Point2> trajectory;  // ordered, at least one point
};

// Standalone SVG: exemplar scatter (two marker styles), trajectory polyline
// with an arrowhead at the final point, PC1/PC2 axis labels. A stationary
// trajectory degenerates to a point marker.
std::string movement_svg(const MovementPlotData& data);
void render_movement_svg(const MovementPlotData& data, const std::string& path);

struct RegionPlotData {
    std::string title;
    std::string label_first;
    std::string label_second;
    std::vector<Point2> exemplars_first;
    std::vector<Point2> exemplars_second;
    Region2 region_first;
    Region2 region_second;
    std::vector<Point2> samples_first;
    std::vector<Point2> samples_second;
};

// Exemplar scatter, 2-sigma region ellipses, and the sampled novel-token
// points.
std::string region_svg(const RegionPlotData& data);
void render_region_svg(const RegionPlotData& data, const std::string& path);

}  // namespace wuglab
