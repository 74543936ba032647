#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace probe {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double xx, double yy) : x(xx), y(yy) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }
    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const {
        double n = norm();
        return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
    }
    Vec2 rotated(double phi) const {
        double c = std::cos(phi), s = std::sin(phi);
        return {c * x - s * y, s * x + c * y};
    }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Distance from p to the closed segment [a,b].
double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Proper or touching intersection of closed segments [p1,q1] and [p2,q2].
bool segments_intersect(const Vec2& p1, const Vec2& q1, const Vec2& p2, const Vec2& q2);

struct Disc {
    Vec2 center;
    double radius = 1.0;
};

// Simple polygon, vertices in order (either orientation accepted on input).
struct Polygon {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Disc, Polygon>;

bool shape_contains(const Shape& s, const Vec2& y);       // open interior
double shape_signed_distance(const Shape& s, const Vec2& y);  // < 0 inside, 0 on boundary
double shape_boundary_distance(const Shape& s, const Vec2& y);
double shape_area(const Shape& s);
double shape_perimeter(const Shape& s);
void shape_bbox(const Shape& s, Vec2& lo, Vec2& hi);
// Points exactly on the shape boundary, spacing <= requested (corner nodes kept for polygons).
std::vector<Vec2> shape_boundary_points(const Shape& s, double spacing);
// Min distance from the closed segment [a,b] to the shape boundary; negative if the
// segment enters the open interior (then minus the deepest penetration proxy is not
// needed, only the sign matters).
double segment_min_signed_distance(const Shape& s, const Vec2& a, const Vec2& b);

enum class BoundaryKind { sound_hard_neumann, conductivity };

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::sound_hard_neumann;
    std::vector<double> jump;  // conductivity: h_j per obstacle, gamma = 1 + h_j inside D_j
};

class GeometryError : public std::runtime_error {
  public:
    GeometryError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

struct Scene {
    Shape outer;
    std::vector<Shape> obstacles;
    double k = 0.0;
    BoundaryCondition bc;

    bool in_domain(const Vec2& y) const { return shape_contains(outer, y); }
    // index of obstacle whose closure contains y, or -1
    int obstacle_closure_index(const Vec2& y, double tol = 1e-12) const;
    bool in_obstacle_open(const Vec2& y) const;
    bool in_obstacle_closure(const Vec2& y, double tol = 1e-12) const {
        return obstacle_closure_index(y, tol) >= 0;
    }
    double outer_signed_distance(const Vec2& y) const { return shape_signed_distance(outer, y); }
    // signed distance to the obstacle union (negative inside some D_j), +inf if no obstacles
    double obstacle_signed_distance(const Vec2& y) const;
    double diameter() const;
};

// Validates the Scene invariants. Throws GeometryError with codes
// obstacle_not_interior / obstacles_overlap / complement_disconnected.
Scene make_scene(Shape outer, std::vector<Shape> obstacles, double k,
                 BoundaryCondition bc = {});

struct Needle {
    std::vector<Vec2> vertices;  // vertices[0] on the outer boundary, back() = tip
    std::vector<double> cum;     // arclength-proportional parameter of each vertex, cum[0]=0, back()=1

    const Vec2& tip() const { return vertices.back(); }
    double length() const;
    Vec2 at(double t) const;
    // distance from y to the curve (the t=0 endpoint does not change the infimum)
    double distance(const Vec2& y) const;
    // needle truncated at parameter t, reparametrized to [0,1]
    Needle truncated(double t) const;
};

// Validates the needle invariants against the scene. Throws GeometryError.
Needle make_needle(std::vector<Vec2> vertices, const Scene& scene);

// sup{0<t<1 : c(s) stays in the obstacle-free part for all s<t}; 1 if the curve
// never meets the obstacle closure.
double impact_parameter(const Needle& needle, const Scene& scene);

enum class TipCase { a_outside_avoiding, b_outside_crossing, c_in_closure, exceptional };

const char* tip_case_name(TipCase c);

TipCase classify_tip(const Needle& needle, const Scene& scene);

struct FiniteCone {
    Vec2 vertex;
    Vec2 axis;        // need not be unit
    double aperture;  // full angle in ]0,pi[
    double height;    // > 0
};

bool cone_contains(const FiniteCone& cone, const Vec2& y);

// Predicate for the open delta-tube around the needle curve.
std::function<bool(const Vec2&)> needle_tube(const Needle& needle, double delta);

}  // namespace probe
