#include "sid/render.hpp"

#include "sid/errors.hpp"

#include <fstream>
#include <iomanip>

namespace sid {

namespace {

const char* palette(int i) {
    static const char* colors[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                                   "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080",
                                   "#9a6324", "#800000", "#808000", "#000075", "#f8a102",
                                   "#5a189a", "#2d6a4f", "#9d0208"};
    return colors[i % 18];
}

}  // namespace

void render_svg(std::ostream& os, const ScenarioInstance& instance,
                const std::vector<Trajectory>& executed) {
    const WorldMap& map = instance.map;
    const double w = map.width(), h = map.height();
    os << std::setprecision(6);
    // World y points up; the inner group flips the SVG y-axis.
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
       << "viewBox=\"" << map.lo.x() << ' ' << -map.hi.y() << ' ' << w << ' ' << h << "\">\n";
    os << "<g transform=\"scale(1,-1)\">\n";
    os << "<rect x=\"" << map.lo.x() << "\" y=\"" << map.lo.y() << "\" width=\"" << w
       << "\" height=\"" << h << "\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\""
       << 0.004 * w << "\"/>\n";

    for (const auto& o : map.obstacles) {
        if (o.shape == Obstacle::Shape::Circle) {
            os << "<circle cx=\"" << o.center.x() << "\" cy=\"" << o.center.y() << "\" r=\""
               << o.radius << "\" fill=\"#b0b0b0\"/>\n";
        } else {
            os << "<rect x=\"" << o.center.x() - o.half_extents.x() << "\" y=\""
               << o.center.y() - o.half_extents.y() << "\" width=\"" << 2.0 * o.half_extents.x()
               << "\" height=\"" << 2.0 * o.half_extents.y() << "\" fill=\"#b0b0b0\"/>\n";
        }
    }

    for (size_t i = 0; i < executed.size(); ++i) {
        os << "<polyline fill=\"none\" stroke=\"" << palette(static_cast<int>(i))
           << "\" stroke-width=\"" << 0.003 * w << "\" points=\"";
        for (size_t k = 0; k < executed[i].points.size(); ++k) {
            if (k > 0) os << ' ';
            os << executed[i].points[k].x() << ',' << executed[i].points[k].y();
        }
        os << "\"/>\n";
    }

    const double r = instance.robot_radius;
    for (size_t i = 0; i < instance.starts.size(); ++i) {
        const auto& s = instance.starts[i];
        const auto& g = instance.goals[i];
        os << "<circle cx=\"" << s.x() << "\" cy=\"" << s.y() << "\" r=\"" << r << "\" fill=\""
           << palette(static_cast<int>(i)) << "\"/>\n";
        os << "<circle cx=\"" << g.x() << "\" cy=\"" << g.y() << "\" r=\"" << r
           << "\" fill=\"none\" stroke=\"" << palette(static_cast<int>(i))
           << "\" stroke-width=\"" << 0.4 * r << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

void save_svg(const std::string& path, const ScenarioInstance& instance,
              const std::vector<Trajectory>& executed) {
    std::ofstream f(path);
    if (!f) throw SidError("cannot open for write: " + path);
    render_svg(f, instance, executed);
}

}  // namespace sid
