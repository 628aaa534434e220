#include "wuglab/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wuglab/error.hpp"

namespace wuglab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Frame {
    double min_x, max_x, min_y, max_y;

    static Frame over(const std::vector<const std::vector<Point2>*>& sets) {
        Frame f{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
        for (const auto* set : sets) {
            for (const Point2& p : *set) {
                f.min_x = std::min(f.min_x, p.x);
                f.max_x = std::max(f.max_x, p.x);
                f.min_y = std::min(f.min_y, p.y);
                f.max_y = std::max(f.max_y, p.y);
            }
        }
        if (!(f.min_x <= f.max_x)) {
            f = {0.0, 1.0, 0.0, 1.0};
        }
        const double pad_x = std::max((f.max_x - f.min_x) * 0.08, 1e-6);
        const double pad_y = std::max((f.max_y - f.min_y) * 0.08, 1e-6);
        f.min_x -= pad_x;
        f.max_x += pad_x;
        f.min_y -= pad_y;
        f.max_y += pad_y;
        return f;
    }

    double sx(double x) const {
        return kMargin + (x - min_x) / (max_x - min_x) * (kWidth - 2.0 * kMargin);
    }
    double sy(double y) const {
        return kHeight - kMargin -
               (y - min_y) / (max_y - min_y) * (kHeight - 2.0 * kMargin);
    }
};

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth)
        << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " "
        << fmt(kHeight) << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << fmt(kWidth / 2.0)
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">"
        << xml_escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f) {
    const double x0 = kMargin, x1 = kWidth - kMargin;
    const double y0 = kHeight - kMargin, y1 = kMargin;
    out << "  <line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << fmt((x0 + x1) / 2.0) << "\" y=\"" << fmt(kHeight - 16.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">PC1"
        << "</text>\n";
    out << "  <text x=\"18\" y=\"" << fmt((y0 + y1) / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 "
        << fmt((y0 + y1) / 2.0) << ")\">PC2</text>\n";
    // Extent labels.
    out << "  <text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 + 16.0)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt4(f.min_x)
        << "</text>\n";
    out << "  <text x=\"" << fmt(x1) << "\" y=\"" << fmt(y0 + 16.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt4(f.max_x) << "</text>\n";
    out << "  <text x=\"" << fmt(x0 - 4.0) << "\" y=\"" << fmt(y0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt4(f.min_y) << "</text>\n";
    out << "  <text x=\"" << fmt(x0 - 4.0) << "\" y=\"" << fmt(y1 + 4.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt4(f.max_y) << "</text>\n";
}

void draw_circles(std::ostringstream& out, const Frame& f,
                  const std::vector<Point2>& points, const char* fill) {
    for (const Point2& p : points) {
        out << "  <circle cx=\"" << fmt(f.sx(p.x)) << "\" cy=\"" << fmt(f.sy(p.y))
            << "\" r=\"3\" fill=\"" << fill << "\" fill-opacity=\"0.7\"/>\n";
    }
}

void draw_squares(std::ostringstream& out, const Frame& f,
                  const std::vector<Point2>& points, const char* fill) {
    for (const Point2& p : points) {
        out << "  <rect x=\"" << fmt(f.sx(p.x) - 3.0) << "\" y=\"" << fmt(f.sy(p.y) - 3.0)
            << "\" width=\"6\" height=\"6\" fill=\"" << fill
            << "\" fill-opacity=\"0.7\"/>\n";
    }
}

void draw_legend(std::ostringstream& out, const std::string& label_first,
                 const std::string& label_second) {
    const double lx = kWidth - kMargin - 150.0;
    out << "  <circle cx=\"" << fmt(lx) << "\" cy=\"40\" r=\"3\" fill=\"#1f77b4\"/>\n";
    out << "  <text x=\"" << fmt(lx + 8.0)
        << "\" y=\"44\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(label_first) << "</text>\n";
    out << "  <rect x=\"" << fmt(lx - 3.0)
        << "\" y=\"53\" width=\"6\" height=\"6\" fill=\"#d62728\"/>\n";
    out << "  <text x=\"" << fmt(lx + 8.0)
        << "\" y=\"60\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(label_second) << "</text>\n";
}

}  // namespace

std::string movement_svg(const MovementPlotData& data) {
    if (data.trajectory.empty()) {
        throw std::invalid_argument("movement_svg: trajectory needs at least one point");
    }
    const Frame f = Frame::over(
        {&data.exemplars_first, &data.exemplars_second, &data.trajectory});

    std::ostringstream out;
    open_svg(out, data.title);
    draw_axes(out, f);
    draw_circles(out, f, data.exemplars_first, "#1f77b4");
    draw_squares(out, f, data.exemplars_second, "#d62728");
    draw_legend(out, data.label_first, data.label_second);

    bool stationary = true;
    for (const Point2& p : data.trajectory) {
        if (!(p == data.trajectory.front())) {
            stationary = false;
            break;
        }
    }
    if (stationary) {
        const Point2 p = data.trajectory.front();
        out << "  <circle cx=\"" << fmt(f.sx(p.x)) << "\" cy=\"" << fmt(f.sy(p.y))
            << "\" r=\"5\" fill=\"black\"/>\n";
    } else {
        out << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < data.trajectory.size(); ++i) {
            if (i > 0) {
                out << ' ';
            }
            out << fmt(f.sx(data.trajectory[i].x)) << ',' << fmt(f.sy(data.trajectory[i].y));
        }
        out << "\"/>\n";
        // Arrowhead along the final segment direction.
        const Point2& last = data.trajectory.back();
        Point2 prev = data.trajectory.front();
        for (std::size_t i = data.trajectory.size(); i-- > 0;) {
            if (!(data.trajectory[i] == last)) {
                prev = data.trajectory[i];
                break;
            }
        }
        const double tip_x = f.sx(last.x);
        const double tip_y = f.sy(last.y);
        double dir_x = tip_x - f.sx(prev.x);
        double dir_y = tip_y - f.sy(prev.y);
        const double norm = std::hypot(dir_x, dir_y);
        dir_x /= norm;
        dir_y /= norm;
        const double px = -dir_y, py = dir_x;  // perpendicular
        const double size = 9.0;
        out << "  <polygon fill=\"black\" points=\"" << fmt(tip_x) << ',' << fmt(tip_y)
            << ' ' << fmt(tip_x - size * dir_x + 0.5 * size * px) << ','
            << fmt(tip_y - size * dir_y + 0.5 * size * py) << ' '
            << fmt(tip_x - size * dir_x - 0.5 * size * px) << ','
            << fmt(tip_y - size * dir_y - 0.5 * size * py) << "\"/>\n";
        const Point2 start = data.trajectory.front();
        out << "  <circle cx=\"" << fmt(f.sx(start.x)) << "\" cy=\"" << fmt(f.sy(start.y))
            << "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

namespace {

void draw_region_ellipse(std::ostringstream& out, const Frame& f, const Region2& region,
                         const char* stroke) {
    // 2-sigma ellipse from the covariance eigen-decomposition.
    const double half_trace = 0.5 * (region.cov_xx + region.cov_yy);
    const double det_term = std::sqrt(0.25 * (region.cov_xx - region.cov_yy) *
                                          (region.cov_xx - region.cov_yy) +
                                      region.cov_xy * region.cov_xy);
    const double l1 = std::max(half_trace + det_term, 0.0);
    const double l2 = std::max(half_trace - det_term, 0.0);
    double angle = 0.0;
    if (region.cov_xy != 0.0 || region.cov_xx != region.cov_yy) {
        angle = 0.5 * std::atan2(2.0 * region.cov_xy, region.cov_xx - region.cov_yy);
    }
    // Scale data radii into screen units along each axis.
    const double rx_data = 2.0 * std::sqrt(l1);
    const double ry_data = 2.0 * std::sqrt(l2);
    const double scale_x = (kWidth - 2.0 * kMargin) / (f.max_x - f.min_x);
    const double scale_y = (kHeight - 2.0 * kMargin) / (f.max_y - f.min_y);
    // Use the mean scale; the ellipse is an annotation, not a measurement.
    const double s = 0.5 * (scale_x + scale_y);
    out << "  <ellipse cx=\"" << fmt(f.sx(region.mean2.x)) << "\" cy=\""
        << fmt(f.sy(region.mean2.y)) << "\" rx=\"" << fmt(std::max(rx_data * s, 1.0))
        << "\" ry=\"" << fmt(std::max(ry_data * s, 1.0)) << "\" fill=\"none\" stroke=\""
        << stroke << "\" stroke-dasharray=\"4 3\" transform=\"rotate("
        << fmt(-angle * 180.0 / 3.14159265358979323846) << ' '
        << fmt(f.sx(region.mean2.x)) << ' ' << fmt(f.sy(region.mean2.y)) << ")\"/>\n";
}

void draw_crosses(std::ostringstream& out, const Frame& f,
                  const std::vector<Point2>& points, const char* stroke) {
    for (const Point2& p : points) {
        const double x = f.sx(p.x);
        const double y = f.sy(p.y);
        out << "  <line x1=\"" << fmt(x - 4.0) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(x + 4.0) << "\" y2=\"" << fmt(y) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"1.5\"/>\n";
        out << "  <line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y - 4.0) << "\" x2=\""
            << fmt(x) << "\" y2=\"" << fmt(y + 4.0) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"1.5\"/>\n";
    }
}

}  // namespace

std::string region_svg(const RegionPlotData& data) {
    const Frame f = Frame::over({&data.exemplars_first, &data.exemplars_second,
                                 &data.samples_first, &data.samples_second});
    std::ostringstream out;
    open_svg(out, data.title);
    draw_axes(out, f);
    draw_circles(out, f, data.exemplars_first, "#1f77b4");
    draw_squares(out, f, data.exemplars_second, "#d62728");
    draw_region_ellipse(out, f, data.region_first, "#1f77b4");
    draw_region_ellipse(out, f, data.region_second, "#d62728");
    draw_crosses(out, f, data.samples_first, "#004488");
    draw_crosses(out, f, data.samples_second, "#882200");
    draw_legend(out, data.label_first, data.label_second);
    out << "</svg>\n";
    return out.str();
}

namespace {

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open svg for writing: " + path);
    }
    out << text;
    if (!out) {
        throw Error("write failure on svg: " + path);
    }
}

}  // namespace

void render_movement_svg(const MovementPlotData& data, const std::string& path) {
    write_text_file(movement_svg(data), path);
}

void render_region_svg(const RegionPlotData& data, const std::string& path) {
    write_text_file(region_svg(data), path);
}

}  // namespace wuglab
