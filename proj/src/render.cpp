#include "grasp2d/render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace grasp2d {

namespace {

struct Bounds {
    double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
    void add(Vec2 p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
};

void addShapeBounds(Bounds& b, const Shape& shape, const Transform& xf) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                const Vec2 c = xf.apply(s.center);
                b.add({c.x - s.radius, c.y - s.radius});
                b.add({c.x + s.radius, c.y + s.radius});
            } else if constexpr (std::is_same_v<T, Polygon>) {
                for (Vec2 v : s.vertices) b.add(xf.apply(v));
            } else {
                for (Vec2 p : {xf.apply(s.a), xf.apply(s.b)}) {
                    b.add({p.x - s.radius, p.y - s.radius});
                    b.add({p.x + s.radius, p.y + s.radius});
                }
            }
        },
        shape);
}

class SvgCanvas {
  public:
    SvgCanvas(const Bounds& b, int size) : size_(size) {
        const double span = std::max(b.max_x - b.min_x, b.max_y - b.min_y);
        scale_ = static_cast<double>(size) / std::max(span, 1e-6);
        origin_ = {(b.min_x + b.max_x) / 2.0, (b.min_y + b.max_y) / 2.0};
        os_ << std::fixed << std::setprecision(2);
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
            << size << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    // world y points up, SVG y points down
    Vec2 px(Vec2 w) const {
        return {(w.x - origin_.x) * scale_ + size_ / 2.0,
                size_ / 2.0 - (w.y - origin_.y) * scale_};
    }

    void polygon(const std::vector<Vec2>& world_pts, const std::string& fill) {
        os_ << "<polygon points=\"";
        for (Vec2 w : world_pts) {
            const Vec2 p = px(w);
            os_ << p.x << ',' << p.y << ' ';
        }
        os_ << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }

    void circle(Vec2 center, double radius, const std::string& fill) {
        const Vec2 p = px(center);
        os_ << "<circle cx=\"" << p.x << "\" cy=\"" << p.y << "\" r=\"" << radius * scale_
            << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }

    void arrow(Vec2 from, Vec2 to) {
        const Vec2 a = px(from);
        const Vec2 b = px(to);
        const Vec2 d{b.x - a.x, b.y - a.y};
        const double len = std::sqrt(d.x * d.x + d.y * d.y);
        if (len < 1e-9) return;
        const Vec2 u{d.x / len, d.y / len};
        const Vec2 n{-u.y, u.x};
        const double head = std::min(8.0, len * 0.4);
        os_ << "<line x1=\"" << a.x << "\" y1=\"" << a.y << "\" x2=\"" << b.x << "\" y2=\""
            << b.y << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
        os_ << "<polygon points=\"" << b.x << ',' << b.y << ' '
            << b.x - head * u.x + 0.4 * head * n.x << ',' << b.y - head * u.y + 0.4 * head * n.y
            << ' ' << b.x - head * u.x - 0.4 * head * n.x << ','
            << b.y - head * u.y - 0.4 * head * n.y << "\" fill=\"red\"/>\n";
    }

    void text(const std::string& s) {
        os_ << "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"14\">" << s
            << "</text>\n";
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

  private:
    std::ostringstream os_;
    int size_;
    double scale_;
    Vec2 origin_;
};

void drawShape(SvgCanvas& canvas, const Shape& shape, const Transform& xf,
               const std::string& fill) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                canvas.circle(xf.apply(s.center), s.radius, fill);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                std::vector<Vec2> pts;
                for (Vec2 v : s.vertices) pts.push_back(xf.apply(v));
                canvas.polygon(pts, fill);
            } else {
                // capsule rendered as its bounding polygon plus end circles
                const Vec2 a = xf.apply(s.a);
                const Vec2 b = xf.apply(s.b);
                Vec2 d{b.x - a.x, b.y - a.y};
                const double len = std::sqrt(d.x * d.x + d.y * d.y);
                if (len > 1e-9) {
                    const Vec2 n{-d.y / len * s.radius, d.x / len * s.radius};
                    canvas.polygon({{a.x + n.x, a.y + n.y},
                                    {b.x + n.x, b.y + n.y},
                                    {b.x - n.x, b.y - n.y},
                                    {a.x - n.x, a.y - n.y}},
                                   fill);
                }
                canvas.circle(a, s.radius, fill);
                canvas.circle(b, s.radius, fill);
            }
        },
        shape);
}

}  // namespace

std::string renderFrame(const Trace& trace, size_t frame_index, const RenderOptions& options) {
    if (frame_index >= trace.frames.size())
        throw std::out_of_range("frame index out of range");
    const TraceFrame& frame = trace.frames[frame_index];

    Bounds bounds;
    for (size_t i = 0; i < trace.bodies.size(); ++i) {
        const auto& [pos, angle] = frame.poses[i];
        const Transform xf{pos, Rot(angle)};
        for (const Shape& s : trace.bodies[i].shapes) addShapeBounds(bounds, s, xf);
    }
    bounds.add({bounds.min_x - options.margin, bounds.min_y - options.margin});
    bounds.add({bounds.max_x + options.margin, bounds.max_y + options.margin});

    SvgCanvas canvas(bounds, options.image_size);
    for (size_t i = 0; i < trace.bodies.size(); ++i) {
        const auto& [pos, angle] = frame.poses[i];
        const Transform xf{pos, Rot(angle)};
        const std::string fill = trace.bodies[i].is_hand ? "#9ecae1" : "#fdae6b";
        for (const Shape& s : trace.bodies[i].shapes) drawShape(canvas, s, xf, fill);
    }
    for (const TraceContact& c : frame.contacts) {
        canvas.circle(c.point, 0.0015, "red");
        const double mag = std::sqrt(c.force.x * c.force.x + c.force.y * c.force.y);
        if (mag > 1e-9)
            canvas.arrow(c.point, {c.point.x + c.force.x * options.force_scale,
                                   c.point.y + c.force.y * options.force_scale});
    }
    std::ostringstream label;
    label << "step " << frame.step << "  reward " << std::fixed << std::setprecision(4)
          << frame.reward << "  contacts " << frame.n_contacts;
    canvas.text(label.str());
    return canvas.finish();
}

int renderTrace(const Trace& trace, const std::string& out_dir, const RenderOptions& options) {
    if (options.every <= 0) throw std::invalid_argument("render stride must be positive");
    std::filesystem::create_directories(out_dir);
    int written = 0;
    for (size_t i = 0; i < trace.frames.size(); i += static_cast<size_t>(options.every)) {
        std::ostringstream name;
        name << "frame_" << std::setw(6) << std::setfill('0') << trace.frames[i].step << ".svg";
        std::ofstream f(std::filesystem::path(out_dir) / name.str());
        if (!f) throw std::runtime_error("cannot write frame in " + out_dir);
        f << renderFrame(trace, i, options);
        ++written;
    }
    return written;
}

}  // namespace grasp2d
