#include "probe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace probe {

namespace {
constexpr double kTol = 1e-12;

double clamp01(double t) { return std::min(1.0, std::max(0.0, t)); }

int orientation_sign(const Vec2& p, const Vec2& q, const Vec2& r) {
    double v = (q - p).cross(r - p);
    double scale = std::max({std::abs(q.x - p.x), std::abs(q.y - p.y), std::abs(r.x - p.x),
                             std::abs(r.y - p.y), 1.0});
    if (std::abs(v) < 1e-14 * scale * scale) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment_collinear(const Vec2& p, const Vec2& q, const Vec2& r) {
    return q.x <= std::max(p.x, r.x) + kTol && q.x >= std::min(p.x, r.x) - kTol &&
           q.y <= std::max(p.y, r.y) + kTol && q.y >= std::min(p.y, r.y) - kTol;
}

double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({dist_point_segment(a, c, d), dist_point_segment(b, c, d),
                     dist_point_segment(c, a, b), dist_point_segment(d, a, b)});
}

const Polygon* as_polygon(const Shape& s) { return std::get_if<Polygon>(&s); }
const Disc* as_disc(const Shape& s) { return std::get_if<Disc>(&s); }

bool polygon_contains(const Polygon& poly, const Vec2& y) {
    // crossing-number parity
    bool inside = false;
    size_t n = poly.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& vi = poly.vertices[i];
        const Vec2& vj = poly.vertices[j];
        if ((vi.y > y.y) != (vj.y > y.y)) {
            double xint = vj.x + (y.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if (y.x < xint) inside = !inside;
        }
    }
    return inside;
}

double polygon_boundary_distance(const Polygon& poly, const Vec2& y) {
    double d = std::numeric_limits<double>::infinity();
    size_t n = poly.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++)
        d = std::min(d, dist_point_segment(y, poly.vertices[j], poly.vertices[i]));
    return d;
}

double polygon_signed_area(const Polygon& poly) {
    double a = 0;
    size_t n = poly.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++)
        a += poly.vertices[j].cross(poly.vertices[i]);
    return 0.5 * a;
}

struct SegmentShapeRelation {
    double boundary_dist = std::numeric_limits<double>::infinity();  // min |sdf| over the segment
    bool enters_open = false;  // some segment point strictly inside
};

SegmentShapeRelation segment_shape_relation(const Shape& s, const Vec2& a, const Vec2& b) {
    SegmentShapeRelation rel;
    if (const Disc* d = as_disc(s)) {
        double dmin = dist_point_segment(d->center, a, b);
        double dmax = std::max(distance(a, d->center), distance(b, d->center));
        rel.enters_open = dmin < d->radius - kTol;
        if (dmin >= d->radius)
            rel.boundary_dist = dmin - d->radius;
        else if (dmax >= d->radius)
            rel.boundary_dist = 0.0;  // crosses the circle
        else
            rel.boundary_dist = d->radius - dmax;  // fully inside
        return rel;
    }
    const Polygon& poly = *as_polygon(s);
    double dedge = std::numeric_limits<double>::infinity();
    size_t n = poly.vertices.size();
    bool crosses = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& vj = poly.vertices[j];
        const Vec2& vi = poly.vertices[i];
        dedge = std::min(dedge, dist_segment_segment(a, b, vj, vi));
        int o1 = orientation_sign(a, b, vj), o2 = orientation_sign(a, b, vi);
        int o3 = orientation_sign(vj, vi, a), o4 = orientation_sign(vj, vi, b);
        if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) crosses = true;
    }
    bool a_in = polygon_contains(poly, a) && polygon_boundary_distance(poly, a) > kTol;
    bool b_in = polygon_contains(poly, b) && polygon_boundary_distance(poly, b) > kTol;
    rel.enters_open = crosses || a_in || b_in;
    rel.boundary_dist = dedge;
    return rel;
}

// Earliest u in [0,1] with a + u(b-a) inside the shape closure; negative if none.
double segment_first_hit(const Shape& s, const Vec2& a, const Vec2& b) {
    if (const Disc* d = as_disc(s)) {
        Vec2 m = a - d->center, v = b - a;
        if (m.norm() <= d->radius + kTol) return 0.0;
        double A = v.squared_norm();
        if (A < kTol * kTol) return -1.0;
        double B = m.dot(v), C = m.squared_norm() - d->radius * d->radius;
        double disc = B * B - A * C;
        if (disc < -kTol * A) return -1.0;
        disc = std::max(disc, 0.0);
        double u = (-B - std::sqrt(disc)) / A;
        if (u >= -kTol && u <= 1.0 + kTol) return clamp01(u);
        return -1.0;
    }
    const Polygon& poly = *as_polygon(s);
    if (polygon_contains(poly, a) || polygon_boundary_distance(poly, a) <= kTol) return 0.0;
    Vec2 v = b - a;
    double best = -1.0;
    size_t n = poly.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& p = poly.vertices[j];
        const Vec2& q = poly.vertices[i];
        Vec2 e = q - p;
        double denom = v.cross(e);
        if (std::abs(denom) < 1e-14) {
            // parallel; touching counts via endpoint distance
            if (dist_point_segment(p, a, b) <= kTol) {
                double u = clamp01((p - a).dot(v) / v.squared_norm());
                if (best < 0 || u < best) best = u;
            }
            continue;
        }
        double u = (p - a).cross(e) / denom;
        double w = (p - a).cross(v) / denom;
        if (u >= -kTol && u <= 1 + kTol && w >= -kTol && w <= 1 + kTol) {
            u = clamp01(u);
            if (best < 0 || u < best) best = u;
        }
    }
    return best;
}

bool shapes_disjoint_closures(const Shape& s1, const Shape& s2) {
    if (const Disc* d1 = as_disc(s1)) {
        if (const Disc* d2 = as_disc(s2))
            return distance(d1->center, d2->center) > d1->radius + d2->radius + kTol;
    }
    // generic: boundaries must stay apart and neither contains the other
    auto some_point = [](const Shape& s) -> Vec2 {
        if (const Disc* d = as_disc(s)) return d->center;
        return as_polygon(s)->vertices.front();
    };
    double bd = std::numeric_limits<double>::infinity();
    auto edges_of = [](const Shape& s, std::vector<std::pair<Vec2, Vec2>>& out) {
        if (const Polygon* p = as_polygon(s)) {
            size_t n = p->vertices.size();
            for (size_t i = 0, j = n - 1; i < n; j = i++)
                out.push_back({p->vertices[j], p->vertices[i]});
        }
    };
    std::vector<std::pair<Vec2, Vec2>> e1, e2;
    edges_of(s1, e1);
    edges_of(s2, e2);
    if (!e1.empty() && !e2.empty()) {
        for (auto& a : e1)
            for (auto& b : e2) bd = std::min(bd, dist_segment_segment(a.first, a.second, b.first, b.second));
    } else if (!e1.empty()) {
        const Disc* d2 = as_disc(s2);
        for (auto& a : e1)
            bd = std::min(bd, std::abs(dist_point_segment(d2->center, a.first, a.second) - d2->radius));
        // edge may cross the disc entirely
        for (auto& a : e1)
            if (dist_point_segment(d2->center, a.first, a.second) < d2->radius) bd = 0;
    } else if (!e2.empty()) {
        return shapes_disjoint_closures(s2, s1);
    }
    if (bd <= kTol) return false;
    if (shape_contains(s1, some_point(s2)) || shape_contains(s2, some_point(s1))) return false;
    return true;
}

bool polygon_is_simple(const Polygon& poly) {
    size_t n = poly.vertices.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; i++) {
        size_t i2 = (i + 1) % n;
        if (distance(poly.vertices[i], poly.vertices[i2]) < kTol) return false;
        for (size_t j = i + 1; j < n; j++) {
            size_t j2 = (j + 1) % n;
            if (j == i || j2 == i || j == i2) continue;  // adjacent edges share a vertex
            if (segments_intersect(poly.vertices[i], poly.vertices[i2], poly.vertices[j],
                                   poly.vertices[j2]))
                return false;
        }
    }
    return true;
}

}  // namespace

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double l2 = ab.squared_norm();
    if (l2 == 0.0) return distance(p, a);
    double t = clamp01((p - a).dot(ab) / l2);
    return distance(p, a + t * ab);
}

bool segments_intersect(const Vec2& p1, const Vec2& q1, const Vec2& p2, const Vec2& q2) {
    int o1 = orientation_sign(p1, q1, p2);
    int o2 = orientation_sign(p1, q1, q2);
    int o3 = orientation_sign(p2, q2, p1);
    int o4 = orientation_sign(p2, q2, q1);
    if (o1 != o2 && o3 != o4 && o1 && o2 && o3 && o4) return true;
    if (o1 == 0 && on_segment_collinear(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment_collinear(p1, q2, q1)) return true;
    if (o3 == 0 && on_segment_collinear(p2, p1, q2)) return true;
    if (o4 == 0 && on_segment_collinear(p2, q1, q2)) return true;
    return false;
}

bool shape_contains(const Shape& s, const Vec2& y) {
    if (const Disc* d = as_disc(s)) return distance(y, d->center) < d->radius;
    return polygon_contains(*as_polygon(s), y);
}

double shape_signed_distance(const Shape& s, const Vec2& y) {
    if (const Disc* d = as_disc(s)) return distance(y, d->center) - d->radius;
    const Polygon& p = *as_polygon(s);
    double bd = polygon_boundary_distance(p, y);
    return polygon_contains(p, y) ? -bd : bd;
}

double shape_boundary_distance(const Shape& s, const Vec2& y) {
    if (const Disc* d = as_disc(s)) return std::abs(distance(y, d->center) - d->radius);
    return polygon_boundary_distance(*as_polygon(s), y);
}

double shape_area(const Shape& s) {
    if (const Disc* d = as_disc(s)) return M_PI * d->radius * d->radius;
    return std::abs(polygon_signed_area(*as_polygon(s)));
}

double shape_perimeter(const Shape& s) {
    if (const Disc* d = as_disc(s)) return 2 * M_PI * d->radius;
    const Polygon& p = *as_polygon(s);
    double len = 0;
    size_t n = p.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) len += distance(p.vertices[j], p.vertices[i]);
    return len;
}

void shape_bbox(const Shape& s, Vec2& lo, Vec2& hi) {
    if (const Disc* d = as_disc(s)) {
        lo = {d->center.x - d->radius, d->center.y - d->radius};
        hi = {d->center.x + d->radius, d->center.y + d->radius};
        return;
    }
    const Polygon& p = *as_polygon(s);
    lo = hi = p.vertices.front();
    for (const Vec2& v : p.vertices) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
}

std::vector<Vec2> shape_boundary_points(const Shape& s, double spacing) {
    std::vector<Vec2> pts;
    if (const Disc* d = as_disc(s)) {
        int n = std::max(8, (int)std::ceil(2 * M_PI * d->radius / spacing));
        pts.reserve(n);
        for (int i = 0; i < n; i++) {
            double th = 2 * M_PI * i / n;
            pts.push_back(d->center + Vec2{d->radius * std::cos(th), d->radius * std::sin(th)});
        }
        return pts;
    }
    const Polygon& p = *as_polygon(s);
    size_t n = p.vertices.size();
    for (size_t i = 0; i < n; i++) {
        Vec2 a = p.vertices[i], b = p.vertices[(i + 1) % n];
        double len = distance(a, b);
        int m = std::max(1, (int)std::ceil(len / spacing));
        for (int j = 0; j < m; j++) pts.push_back(a + (double(j) / m) * (b - a));
    }
    return pts;
}

double segment_min_signed_distance(const Shape& s, const Vec2& a, const Vec2& b) {
    SegmentShapeRelation rel = segment_shape_relation(s, a, b);
    return rel.enters_open ? -std::max(rel.boundary_dist, kTol) : rel.boundary_dist;
}

int Scene::obstacle_closure_index(const Vec2& y, double tol) const {
    for (size_t j = 0; j < obstacles.size(); j++)
        if (shape_signed_distance(obstacles[j], y) <= tol) return (int)j;
    return -1;
}

bool Scene::in_obstacle_open(const Vec2& y) const {
    for (const Shape& s : obstacles)
        if (shape_signed_distance(s, y) < -kTol) return true;
    return false;
}

double Scene::obstacle_signed_distance(const Vec2& y) const {
    double d = std::numeric_limits<double>::infinity();
    for (const Shape& s : obstacles) d = std::min(d, shape_signed_distance(s, y));
    return d;
}

double Scene::diameter() const {
    Vec2 lo, hi;
    shape_bbox(outer, lo, hi);
    return (hi - lo).norm();
}

namespace {

void validate_shape(const Shape& s) {
    if (const Disc* d = as_disc(s)) {
        if (!(d->radius > 0)) throw GeometryError("invalid_shape", "disc radius must be positive");
        return;
    }
    const Polygon& p = *as_polygon(s);
    if (p.vertices.size() < 3 || !polygon_is_simple(p) ||
        std::abs(polygon_signed_area(p)) < kTol)
        throw GeometryError("invalid_shape", "polygon must be simple with positive area");
}

void normalize_ccw(Shape& s) {
    if (Polygon* p = std::get_if<Polygon>(&s))
        if (polygon_signed_area(*p) < 0) std::reverse(p->vertices.begin(), p->vertices.end());
}

bool obstacle_strictly_interior(const Shape& outer, const Shape& obs) {
    if (const Disc* od = as_disc(outer)) {
        if (const Disc* d = as_disc(obs))
            return distance(d->center, od->center) + d->radius < od->radius - kTol;
        const Polygon& p = *as_polygon(obs);
        for (const Vec2& v : p.vertices)
            if (distance(v, od->center) >= od->radius - kTol) return false;
        return true;  // disc is convex
    }
    const Polygon& op = *as_polygon(outer);
    if (const Disc* d = as_disc(obs)) {
        if (!polygon_contains(op, d->center)) return false;
        return polygon_boundary_distance(op, d->center) > d->radius + kTol;
    }
    const Polygon& p = *as_polygon(obs);
    size_t n = p.vertices.size();
    for (const Vec2& v : p.vertices)
        if (!polygon_contains(op, v) || polygon_boundary_distance(op, v) <= kTol) return false;
    size_t m = op.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++)
        for (size_t a = 0, b = m - 1; a < m; b = a++)
            if (segments_intersect(p.vertices[j], p.vertices[i], op.vertices[b], op.vertices[a]))
                return false;
    return true;
}

// Grid flood fill over the free region; coarse but adequate at desk scale.
bool complement_connected(const Scene& scene) {
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    const int N = 192;
    double dx = (hi.x - lo.x) / N, dy = (hi.y - lo.y) / N;
    std::vector<int8_t> free_cell(N * N, 0);
    int first = -1;
    for (int iy = 0; iy < N; iy++)
        for (int ix = 0; ix < N; ix++) {
            Vec2 c{lo.x + (ix + 0.5) * dx, lo.y + (iy + 0.5) * dy};
            if (scene.in_domain(c) && !scene.in_obstacle_closure(c)) {
                free_cell[iy * N + ix] = 1;
                if (first < 0) first = iy * N + ix;
            }
        }
    if (first < 0) return false;
    std::deque<int> q{first};
    free_cell[first] = 2;
    size_t seen = 1;
    while (!q.empty()) {
        int id = q.front();
        q.pop_front();
        int ix = id % N, iy = id / N;
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& d : nb) {
            int jx = ix + d[0], jy = iy + d[1];
            if (jx < 0 || jy < 0 || jx >= N || jy >= N) continue;
            int jd = jy * N + jx;
            if (free_cell[jd] == 1) {
                free_cell[jd] = 2;
                q.push_back(jd);
                seen++;
            }
        }
    }
    size_t total = 0;
    for (int8_t f : free_cell)
        if (f) total++;
    return seen == total;
}

}  // namespace

Scene make_scene(Shape outer, std::vector<Shape> obstacles, double k, BoundaryCondition bc) {
    if (!(k >= 0)) throw GeometryError("invalid_wavenumber", "k must be >= 0");
    validate_shape(outer);
    normalize_ccw(outer);
    for (Shape& s : obstacles) {
        validate_shape(s);
        normalize_ccw(s);
    }
    if (bc.kind == BoundaryKind::conductivity && bc.jump.size() != obstacles.size())
        throw GeometryError("invalid_bc", "conductivity jump list must match obstacle count");
    for (size_t j = 0; j < obstacles.size(); j++)
        if (!obstacle_strictly_interior(outer, obstacles[j]))
            throw GeometryError("obstacle_not_interior",
                                "obstacle " + std::to_string(j) + " not strictly inside the domain");
    for (size_t j = 0; j < obstacles.size(); j++)
        for (size_t l = j + 1; l < obstacles.size(); l++)
            if (!shapes_disjoint_closures(obstacles[j], obstacles[l]))
                throw GeometryError("obstacles_overlap", "obstacle closures " + std::to_string(j) +
                                                             " and " + std::to_string(l) +
                                                             " are not disjoint");
    Scene scene{std::move(outer), std::move(obstacles), k, std::move(bc)};
    if (!scene.obstacles.empty() && !complement_connected(scene))
        throw GeometryError("complement_disconnected",
                            "domain minus obstacle closures is not connected");
    return scene;
}

double Needle::length() const {
    double len = 0;
    for (size_t i = 1; i < vertices.size(); i++)
        len += probe::distance(vertices[i - 1], vertices[i]);
    return len;
}

Vec2 Needle::at(double t) const {
    t = clamp01(t);
    auto it = std::upper_bound(cum.begin(), cum.end(), t);
    size_t i = std::min(vertices.size() - 1, (size_t)std::max<ptrdiff_t>(1, it - cum.begin()));
    double t0 = cum[i - 1], t1 = cum[i];
    double s = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    return vertices[i - 1] + s * (vertices[i] - vertices[i - 1]);
}

double Needle::distance(const Vec2& y) const {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < vertices.size(); i++)
        d = std::min(d, dist_point_segment(y, vertices[i - 1], vertices[i]));
    return d;
}

Needle Needle::truncated(double t) const {
    t = clamp01(t);
    Needle out;
    out.vertices.push_back(vertices.front());
    for (size_t i = 1; i < vertices.size() && cum[i] < t; i++) out.vertices.push_back(vertices[i]);
    Vec2 tip = at(t);
    if (probe::distance(out.vertices.back(), tip) > kTol) out.vertices.push_back(tip);
    if (out.vertices.size() < 2) out.vertices.push_back(tip);  // degenerate truncation at t=0
    double len = 0;
    out.cum.assign(out.vertices.size(), 0.0);
    for (size_t i = 1; i < out.vertices.size(); i++) {
        len += probe::distance(out.vertices[i - 1], out.vertices[i]);
        out.cum[i] = len;
    }
    if (len > 0)
        for (double& c : out.cum) c /= len;
    out.cum.back() = 1.0;
    return out;
}

Needle make_needle(std::vector<Vec2> vertices, const Scene& scene) {
    if (vertices.size() < 2)
        throw GeometryError("invalid_needle", "needle needs at least two vertices");
    for (size_t i = 1; i < vertices.size(); i++)
        if (distance(vertices[i - 1], vertices[i]) < kTol)
            throw GeometryError("invalid_needle", "repeated consecutive vertices");
    if (std::abs(shape_signed_distance(scene.outer, vertices.front())) > 1e-9)
        throw GeometryError("invalid_needle", "needle must start on the outer boundary");
    for (size_t i = 1; i < vertices.size(); i++)
        if (shape_signed_distance(scene.outer, vertices[i]) >= -kTol)
            throw GeometryError("invalid_needle",
                                "needle interior vertices and tip must lie inside the domain");
    // segments stay inside the domain (relevant for non-convex polygonal domains);
    // the first segment touches the boundary at its start point only
    if (const Polygon* op = std::get_if<Polygon>(&scene.outer)) {
        size_t m = op->vertices.size();
        for (size_t i = 1; i < vertices.size(); i++) {
            Vec2 a = vertices[i - 1], b = vertices[i];
            if (i == 1) a = a + 1e-9 * (b - a);  // lift the start off the boundary
            for (size_t e = 0, f = m - 1; e < m; f = e++)
                if (segments_intersect(a, b, op->vertices[f], op->vertices[e]))
                    throw GeometryError("invalid_needle", "needle leaves the domain");
        }
    }
    // injectivity
    size_t ns = vertices.size() - 1;
    for (size_t i = 0; i < ns; i++) {
        for (size_t j = i + 2; j < ns; j++)
            if (segments_intersect(vertices[i], vertices[i + 1], vertices[j], vertices[j + 1]))
                throw GeometryError("invalid_needle", "needle is self-intersecting");
        if (i + 1 < ns) {
            Vec2 u = vertices[i + 1] - vertices[i], v = vertices[i + 2] - vertices[i + 1];
            if (std::abs(u.cross(v)) < kTol && u.dot(v) < 0)
                throw GeometryError("invalid_needle", "needle doubles back on itself");
        }
    }
    Needle n;
    n.vertices = std::move(vertices);
    n.cum.assign(n.vertices.size(), 0.0);
    double len = 0;
    for (size_t i = 1; i < n.vertices.size(); i++) {
        len += distance(n.vertices[i - 1], n.vertices[i]);
        n.cum[i] = len;
    }
    for (double& c : n.cum) c /= len;
    n.cum.back() = 1.0;
    return n;
}

double impact_parameter(const Needle& needle, const Scene& scene) {
    for (size_t i = 1; i < needle.vertices.size(); i++) {
        const Vec2& a = needle.vertices[i - 1];
        const Vec2& b = needle.vertices[i];
        double best = -1.0;
        for (const Shape& obs : scene.obstacles) {
            double u = segment_first_hit(obs, a, b);
            if (u >= 0 && (best < 0 || u < best)) best = u;
        }
        if (best >= 0) {
            double t = needle.cum[i - 1] + (needle.cum[i] - needle.cum[i - 1]) * best;
            return std::min(t, 1.0);
        }
    }
    return 1.0;
}

const char* tip_case_name(TipCase c) {
    switch (c) {
        case TipCase::a_outside_avoiding: return "a_outside_avoiding";
        case TipCase::b_outside_crossing: return "b_outside_crossing";
        case TipCase::c_in_closure: return "c_in_closure";
        default: return "exceptional";
    }
}

TipCase classify_tip(const Needle& needle, const Scene& scene) {
    const Vec2& x = needle.tip();
    if (scene.in_obstacle_closure(x)) return TipCase::c_in_closure;
    bool enters = false;
    double min_bd = std::numeric_limits<double>::infinity();
    for (const Shape& obs : scene.obstacles) {
        for (size_t i = 1; i < needle.vertices.size(); i++) {
            SegmentShapeRelation rel =
                segment_shape_relation(obs, needle.vertices[i - 1], needle.vertices[i]);
            if (rel.enters_open) enters = true;
            min_bd = std::min(min_bd, rel.boundary_dist);
        }
    }
    if (enters) return TipCase::b_outside_crossing;
    if (min_bd <= kTol) return TipCase::exceptional;
    return TipCase::a_outside_avoiding;
}

bool cone_contains(const FiniteCone& cone, const Vec2& y) {
    Vec2 d = y - cone.vertex;
    double r = d.norm();
    if (!(r < cone.height)) return false;
    return d.dot(cone.axis) > r * cone.axis.norm() * std::cos(cone.aperture / 2);
}

std::function<bool(const Vec2&)> needle_tube(const Needle& needle, double delta) {
    if (!(delta > 0)) throw GeometryError("invalid_tube", "tube radius must be positive");
    return [needle, delta](const Vec2& y) { return needle.distance(y) < delta; };
}

}  // namespace probe
