#include "probe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace probe {

namespace {

uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

// ---------------------------------------------------------------- Delaunay

struct DTri {
    int v[3];
    int nb[3];  // neighbor across the edge opposite v[i]
    bool alive = true;
};

class Delaunay {
  public:
    explicit Delaunay(const std::vector<Vec2>& user_points) {
        double scale = 1.0;
        Vec2 lo = user_points.front(), hi = lo;
        for (const Vec2& p : user_points) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
            scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
        }
        eps_orient_ = 1e-14 * scale * scale;
        eps_circ_ = 1e-13 * scale * scale * scale * scale;
        Vec2 c = 0.5 * (lo + hi);
        double r = std::max({hi.x - lo.x, hi.y - lo.y, 1e-6}) * 40.0;
        pts_.push_back(c + Vec2{0, r});
        pts_.push_back(c + Vec2{-0.866 * r, -0.5 * r});
        pts_.push_back(c + Vec2{0.866 * r, -0.5 * r});
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
        // Morton-order insertion for walk locality
        std::vector<int> order(user_points.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<uint64_t> codes(user_points.size());
        for (size_t i = 0; i < user_points.size(); i++) {
            uint32_t xi = (uint32_t)(1023.999 * (user_points[i].x - lo.x) /
                                     std::max(hi.x - lo.x, 1e-300));
            uint32_t yi = (uint32_t)(1023.999 * (user_points[i].y - lo.y) /
                                     std::max(hi.y - lo.y, 1e-300));
            codes[i] = interleave(xi, yi);
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) { return codes[a] < codes[b]; });
        pts_.resize(3 + user_points.size());
        for (size_t i = 3; i < pts_.size(); i++) pts_[i] = Vec2{0, 0};
        for (int id : order) {
            pts_[3 + id] = user_points[id];
            insert(3 + id);
        }
    }

    // triangles in user indexing, super-triangle fans dropped
    std::vector<std::array<int, 3>> triangles() const {
        std::vector<std::array<int, 3>> out;
        for (const DTri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
            out.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
        }
        return out;
    }

  private:
    static uint64_t interleave(uint32_t x, uint32_t y) {
        auto spread = [](uint64_t v) {
            v &= 0xffffffffull;
            v = (v | (v << 16)) & 0x0000ffff0000ffffull;
            v = (v | (v << 8)) & 0x00ff00ff00ff00ffull;
            v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0full;
            v = (v | (v << 2)) & 0x3333333333333333ull;
            v = (v | (v << 1)) & 0x5555555555555555ull;
            return v;
        };
        return spread(x) | (spread(y) << 1);
    }

    double orient(int a, int b, int c) const {
        return (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    }

    double incircle(const DTri& t, int p) const {
        const Vec2& a = pts_[t.v[0]];
        const Vec2& b = pts_[t.v[1]];
        const Vec2& c = pts_[t.v[2]];
        const Vec2& d = pts_[p];
        double ax = a.x - d.x, ay = a.y - d.y;
        double bx = b.x - d.x, by = b.y - d.y;
        double cx = c.x - d.x, cy = c.y - d.y;
        double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        return ax * (by * c2 - cy * b2) - ay * (bx * c2 - cx * b2) + a2 * (bx * cy - cx * by);
    }

    int locate(int p) const {
        int t = last_;
        int steps = 0;
        int limit = (int)tris_.size() * 2 + 64;
        while (steps++ < limit) {
            if (!tris_[t].alive) break;
            bool moved = false;
            for (int i = 0; i < 3; i++) {
                int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                if (orient(a, b, p) < -eps_orient_) {
                    int nxt = tris_[t].nb[i];
                    if (nxt < 0) break;
                    t = nxt;
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        // fallback: exhaustive scan
        for (int i = (int)tris_.size() - 1; i >= 0; i--) {
            if (!tris_[i].alive) continue;
            bool inside = true;
            for (int e = 0; e < 3; e++)
                if (orient(tris_[i].v[(e + 1) % 3], tris_[i].v[(e + 2) % 3], p) < -eps_orient_)
                    inside = false;
            if (inside) return i;
        }
        throw MeshError("mesh_quality_failure", "point location failed");
    }

    void insert(int p) {
        int t0 = locate(p);
        // cavity of circumcircle violations
        std::vector<int> cavity{t0};
        std::unordered_set<int> in_cavity{t0};
        std::deque<int> q{t0};
        while (!q.empty()) {
            int t = q.front();
            q.pop_front();
            for (int i = 0; i < 3; i++) {
                int n = tris_[t].nb[i];
                if (n < 0 || in_cavity.count(n)) continue;
                if (incircle(tris_[n], p) > eps_circ_) {
                    in_cavity.insert(n);
                    cavity.push_back(n);
                    q.push_back(n);
                }
            }
        }
        // cavity boundary; repair until star-shaped around p
        struct BEdge {
            int a, b, outer;
        };
        std::vector<BEdge> boundary;
        for (int repair = 0; repair < 256; repair++) {
            boundary.clear();
            bool bad = false;
            for (int t : cavity) {
                for (int i = 0; i < 3; i++) {
                    int n = tris_[t].nb[i];
                    if (n >= 0 && in_cavity.count(n)) continue;
                    int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                    if (orient(a, b, p) <= eps_orient_) {
                        if (n < 0) throw MeshError("mesh_quality_failure", "cavity hit hull");
                        in_cavity.insert(n);
                        cavity.push_back(n);
                        bad = true;
                        break;
                    }
                    boundary.push_back({a, b, n});
                }
                if (bad) break;
            }
            if (!bad) break;
            if (repair == 255) throw MeshError("mesh_quality_failure", "cavity repair failed");
        }
        for (int t : cavity) tris_[t].alive = false;
        std::unordered_map<int, int> by_start, by_end;
        std::vector<int> created;
        created.reserve(boundary.size());
        for (const BEdge& e : boundary) {
            int id = alloc();
            tris_[id].v[0] = p;
            tris_[id].v[1] = e.a;
            tris_[id].v[2] = e.b;
            tris_[id].nb[0] = e.outer;  // across (a,b)
            tris_[id].nb[1] = -1;
            tris_[id].nb[2] = -1;
            if (e.outer >= 0) {
                DTri& o = tris_[e.outer];
                for (int i = 0; i < 3; i++) {
                    int oa = o.v[(i + 1) % 3], ob = o.v[(i + 2) % 3];
                    if ((oa == e.b && ob == e.a) || (oa == e.a && ob == e.b)) o.nb[i] = id;
                }
            }
            by_start[e.a] = id;
            by_end[e.b] = id;
            created.push_back(id);
        }
        for (int id : created) {
            int a = tris_[id].v[1], b = tris_[id].v[2];
            tris_[id].nb[2] = by_end.at(a);    // across (p,a): triangle whose edge ends at a
            tris_[id].nb[1] = by_start.at(b);  // across (b,p): triangle whose edge starts at b
        }
        last_ = created.empty() ? last_ : created.front();
    }

    int alloc() {
        if (!free_.empty()) {
            int id = free_.back();
            free_.pop_back();
            tris_[id].alive = true;
            return id;
        }
        tris_.push_back({});
        tris_.back().alive = true;
        return (int)tris_.size() - 1;
    }

    std::vector<Vec2> pts_;
    std::vector<DTri> tris_;
    std::vector<int> free_;
    int last_ = 0;
    double eps_orient_ = 1e-14;
    double eps_circ_ = 1e-13;
};

// ---------------------------------------------------------------- boundary rings

// Boundary point chain with exact-on-boundary refinement (angle bisection on
// circles, arclength bisection on polygon edges; polygon corners are always nodes).
struct Ring {
    const Shape* shape = nullptr;
    std::vector<double> params;  // sorted; angle for discs, arclength for polygons
    double period = 0.0;

    Vec2 point(double s) const {
        if (const Disc* d = std::get_if<Disc>(shape))
            return d->center + Vec2{d->radius * std::cos(s), d->radius * std::sin(s)};
        const Polygon& poly = *std::get_if<Polygon>(shape);
        size_t n = poly.vertices.size();
        double acc = 0;
        for (size_t i = 0; i < n; i++) {
            Vec2 a = poly.vertices[i], b = poly.vertices[(i + 1) % n];
            double len = distance(a, b);
            if (s <= acc + len + 1e-12) {
                double t = std::min(1.0, std::max(0.0, (s - acc) / len));
                return a + t * (b - a);
            }
            acc += len;
        }
        return poly.vertices.front();
    }

    void refine_gap(size_t i) {
        double a = params[i];
        double b = (i + 1 < params.size()) ? params[i + 1] : params.front() + period;
        double mid = 0.5 * (a + b);
        if (mid >= period) mid -= period;
        params.push_back(mid);
        std::sort(params.begin(), params.end());
    }
};

Ring make_ring(const Shape& shape, double h) {
    Ring r;
    r.shape = &shape;
    if (const Disc* d = std::get_if<Disc>(&shape)) {
        r.period = 2 * M_PI;
        int n = std::max(8, (int)std::ceil(2 * M_PI * d->radius / h));
        for (int i = 0; i < n; i++) r.params.push_back(2 * M_PI * i / n);
        return r;
    }
    const Polygon& poly = *std::get_if<Polygon>(&shape);
    size_t n = poly.vertices.size();
    double acc = 0;
    for (size_t i = 0; i < n; i++) {
        double len = distance(poly.vertices[i], poly.vertices[(i + 1) % n]);
        int m = std::max(1, (int)std::ceil(len / h));
        for (int j = 0; j < m; j++) r.params.push_back(acc + len * j / m);
        acc += len;
    }
    r.period = acc;
    std::sort(r.params.begin(), r.params.end());
    return r;
}

// deterministic jitter in [-1,1]
double hash_jitter(uint64_t key) {
    key ^= key >> 33;
    key *= 0xff51afd7ed558ccdull;
    key ^= key >> 33;
    key *= 0xc4ceb9fe1a85ec53ull;
    key ^= key >> 33;
    return 2.0 * (double)(key & 0xfffffffull) / (double)0xfffffffull - 1.0;
}

struct PointSet {
    std::vector<Vec2> points;
    std::vector<int> ring_of;           // ring index per point, -1 for lattice points
    std::vector<std::vector<int>> ring_ids;  // point ids of each ring in order
};

PointSet collect_points(const Scene& scene, const std::vector<Ring>& rings, double h) {
    PointSet ps;
    for (size_t ri = 0; ri < rings.size(); ri++) {
        std::vector<int> ids;
        for (double s : rings[ri].params) {
            ids.push_back((int)ps.points.size());
            ps.points.push_back(rings[ri].point(s));
            ps.ring_of.push_back((int)ri);
        }
        ps.ring_ids.push_back(std::move(ids));
    }
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    double dy = h * std::sqrt(3.0) / 2.0;
    int jmax = (int)std::ceil((hi.y - lo.y) / dy) + 1;
    for (int j = 0; j <= jmax; j++) {
        double y = lo.y + j * dy;
        double x0 = lo.x + ((j % 2) ? 0.5 * h : 0.0);
        int imax = (int)std::ceil((hi.x - lo.x) / h) + 1;
        for (int i = 0; i <= imax; i++) {
            uint64_t key = (uint64_t(uint32_t(i)) << 32) | uint32_t(j);
            Vec2 p{x0 + i * h + 0.06 * h * hash_jitter(key),
                   y + 0.06 * h * hash_jitter(key ^ 0x9e3779b97f4a7c15ull)};
            if (shape_signed_distance(scene.outer, p) > -0.55 * h) continue;
            bool clear = true;
            for (const Shape& obs : scene.obstacles)
                if (std::abs(shape_signed_distance(obs, p)) < 0.55 * h) clear = false;
            if (!clear) continue;
            ps.points.push_back(p);
            ps.ring_of.push_back(-1);
        }
    }
    return ps;
}

std::unordered_set<uint64_t> edge_set(const std::vector<std::array<int, 3>>& tris) {
    std::unordered_set<uint64_t> es;
    es.reserve(tris.size() * 2);
    for (const auto& t : tris)
        for (int i = 0; i < 3; i++) es.insert(edge_key(t[i], t[(i + 1) % 3]));
    return es;
}

// ring gaps whose chord is not an edge of the triangulation
std::vector<std::pair<int, size_t>> conformity_gaps(const PointSet& ps,
                                                    const std::vector<std::array<int, 3>>& tris) {
    auto es = edge_set(tris);
    std::vector<std::pair<int, size_t>> gaps;
    for (size_t ri = 0; ri < ps.ring_ids.size(); ri++) {
        const auto& ids = ps.ring_ids[ri];
        for (size_t i = 0; i < ids.size(); i++) {
            int a = ids[i], b = ids[(i + 1) % ids.size()];
            if (!es.count(edge_key(a, b))) gaps.push_back({(int)ri, i});
        }
    }
    return gaps;
}

double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
    auto ang = [](const Vec2& u, const Vec2& v) {
        double d = u.dot(v) / (u.norm() * v.norm());
        return std::acos(std::min(1.0, std::max(-1.0, d)));
    };
    double t1 = ang(b - a, c - a), t2 = ang(a - b, c - b);
    return std::min({t1, t2, M_PI - t1 - t2});
}

void smooth_interior(const Scene& scene, PointSet& ps,
                     const std::vector<std::array<int, 3>>& tris, double h, int sweeps) {
    std::vector<std::vector<int>> adj(ps.points.size());
    for (const auto& t : tris)
        for (int i = 0; i < 3; i++) {
            adj[t[i]].push_back(t[(i + 1) % 3]);
            adj[t[i]].push_back(t[(i + 2) % 3]);
        }
    auto region_of = [&](const Vec2& p) {
        if (!shape_contains(scene.outer, p)) return -1;
        for (size_t j = 0; j < scene.obstacles.size(); j++)
            if (shape_signed_distance(scene.obstacles[j], p) < 0) return (int)j + 1;
        return 0;
    };
    for (int sweep = 0; sweep < sweeps; sweep++) {
        for (size_t i = 0; i < ps.points.size(); i++) {
            if (ps.ring_of[i] >= 0 || adj[i].empty()) continue;
            Vec2 avg{0, 0};
            for (int n : adj[i]) avg = avg + ps.points[n];
            avg = (1.0 / adj[i].size()) * avg;
            if (region_of(avg) != region_of(ps.points[i])) continue;
            if (shape_signed_distance(scene.outer, avg) > -0.4 * h) continue;
            bool clear = true;
            for (const Shape& obs : scene.obstacles)
                if (std::abs(shape_signed_distance(obs, avg)) < 0.4 * h) clear = false;
            if (!clear) continue;
            ps.points[i] = avg;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- Mesh methods

double Mesh::triangle_area(int t) const {
    const auto& tr = triangles[t];
    return 0.5 * (nodes[tr[1]] - nodes[tr[0]]).cross(nodes[tr[2]] - nodes[tr[0]]);
}

double Mesh::area() const {
    double a = 0;
    for (size_t t = 0; t < triangles.size(); t++) a += triangle_area((int)t);
    return a;
}

double Mesh::min_angle_deg() const {
    double m = M_PI;
    for (const auto& t : triangles)
        m = std::min(m, tri_min_angle(nodes[t[0]], nodes[t[1]], nodes[t[2]]));
    return m * 180.0 / M_PI;
}

int Mesh::euler_characteristic() const {
    std::unordered_set<uint64_t> edges;
    std::unordered_set<int> verts;
    for (const auto& t : triangles)
        for (int i = 0; i < 3; i++) {
            edges.insert(edge_key(t[i], t[(i + 1) % 3]));
            verts.insert(t[i]);
        }
    return (int)verts.size() - (int)edges.size() + (int)triangles.size();
}

namespace {
std::vector<int> chain_loop(const std::vector<MeshEdge>& edges, int tag) {
    std::unordered_map<int, int> next;
    int start = std::numeric_limits<int>::max();
    for (const MeshEdge& e : edges)
        if (e.tag == tag) {
            next[e.a] = e.b;
            start = std::min(start, e.a);
        }
    std::vector<int> loop;
    if (next.empty()) return loop;
    int cur = start;
    for (size_t guard = 0; guard <= next.size(); guard++) {
        loop.push_back(cur);
        auto it = next.find(cur);
        if (it == next.end()) break;
        cur = it->second;
        if (cur == start) break;
    }
    return loop;
}
}  // namespace

std::vector<int> Mesh::outer_boundary_loop() const { return chain_loop(boundary_edges, 0); }

std::vector<int> Mesh::interface_loop(int j) const {
    std::vector<int> loop = chain_loop(interface_edges, j + 1);
    if (loop.empty()) loop = chain_loop(boundary_edges, j + 1);  // restricted mesh
    return loop;
}

// ---------------------------------------------------------------- triangulate

Mesh triangulate(const Scene& scene, double h) {
    if (!(h > 0)) throw MeshError("mesh_quality_failure", "h must be positive");
    std::vector<Ring> rings;
    rings.push_back(make_ring(scene.outer, h));
    for (const Shape& obs : scene.obstacles) {
        Ring r = make_ring(obs, h);
        if (r.params.size() < 8)
            throw MeshError("mesh_quality_failure",
                            "h too coarse: obstacle boundary needs at least 8 edges");
        rings.push_back(std::move(r));
    }

    PointSet ps;
    std::vector<std::array<int, 3>> tris;
    bool conforming = false;
    for (int round = 0; round < 10 && !conforming; round++) {
        ps = collect_points(scene, rings, h);
        tris = Delaunay(ps.points).triangles();
        auto gaps = conformity_gaps(ps, tris);
        if (gaps.empty()) {
            conforming = true;
            break;
        }
        // refine from the back so earlier indices stay valid within each ring
        std::sort(gaps.begin(), gaps.end(),
                  [](auto& a, auto& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); });
        for (auto& g : gaps) rings[g.first].refine_gap(g.second);
    }
    if (!conforming)
        throw MeshError("mesh_quality_failure", "could not recover boundary conformity");

    {
        PointSet smoothed = ps;
        smooth_interior(scene, smoothed, tris, h, 3);
        auto tris2 = Delaunay(smoothed.points).triangles();
        if (conformity_gaps(smoothed, tris2).empty()) {
            ps = std::move(smoothed);
            tris = std::move(tris2);
        }
    }

    Mesh mesh;
    mesh.h = h;
    mesh.nodes = ps.points;
    auto region_of_point = [&](const Vec2& p) {
        for (size_t j = 0; j < scene.obstacles.size(); j++)
            if (shape_signed_distance(scene.obstacles[j], p) < 0) return (int)j + 1;
        return 0;
    };
    for (const auto& t : tris) {
        Vec2 c = (1.0 / 3.0) * (ps.points[t[0]] + ps.points[t[1]] + ps.points[t[2]]);
        if (!shape_contains(scene.outer, c)) continue;
        mesh.triangles.push_back(t);
        mesh.tri_region.push_back(region_of_point(c));
    }

    // boundary and interface edges
    std::unordered_map<uint64_t, std::array<int, 2>> incidence;
    incidence.reserve(mesh.triangles.size() * 2);
    for (size_t ti = 0; ti < mesh.triangles.size(); ti++)
        for (int i = 0; i < 3; i++) {
            uint64_t k = edge_key(mesh.triangles[ti][i], mesh.triangles[ti][(i + 1) % 3]);
            auto it = incidence.find(k);
            if (it == incidence.end())
                incidence[k] = {(int)ti, -1};
            else
                it->second[1] = (int)ti;
        }
    // consecutive ring pairs give the only legal boundary and interface chords
    std::unordered_map<uint64_t, int> ring_chord;  // edge key -> ring index
    for (size_t ri = 0; ri < ps.ring_ids.size(); ri++) {
        const auto& ids = ps.ring_ids[ri];
        for (size_t i = 0; i < ids.size(); i++)
            ring_chord[edge_key(ids[i], ids[(i + 1) % ids.size()])] = (int)ri;
    }
    for (size_t ti = 0; ti < mesh.triangles.size(); ti++) {
        const auto& t = mesh.triangles[ti];
        for (int i = 0; i < 3; i++) {
            int a = t[i], b = t[(i + 1) % 3];
            uint64_t k = edge_key(a, b);
            const auto& inc = incidence[k];
            if (inc[0] != (int)ti) continue;  // emit each edge once, owner = first triangle
            auto rc = ring_chord.find(k);
            if (inc[1] < 0) {
                if (rc == ring_chord.end())
                    throw MeshError("mesh_quality_failure", "exposed edge off the boundary rings");
                if (rc->second == 0)
                    mesh.boundary_edges.push_back({a, b, 0});
                else if (mesh.tri_region[ti] == 0)
                    mesh.boundary_edges.push_back({a, b, rc->second});
            } else if (mesh.tri_region[inc[0]] != mesh.tri_region[inc[1]]) {
                if (rc == ring_chord.end() || rc->second == 0)
                    throw MeshError("mesh_quality_failure", "region change off an obstacle ring");
                if (mesh.tri_region[ti] == 0)
                    mesh.interface_edges.push_back({a, b, rc->second});
                else
                    mesh.interface_edges.push_back({b, a, rc->second});
            }
        }
    }

    if (mesh.min_angle_deg() < 20.0)
        throw MeshError("mesh_quality_failure", "min angle below 20 degrees");
    return mesh;
}

Mesh restrict_to_complement(const Mesh& mesh) {
    Mesh out;
    out.h = mesh.h;
    std::vector<int> remap(mesh.nodes.size(), -1);
    auto use_node = [&](int id) {
        if (remap[id] < 0) {
            remap[id] = (int)out.nodes.size();
            out.nodes.push_back(mesh.nodes[id]);
            out.parent_node.push_back(id);
        }
        return remap[id];
    };
    for (size_t ti = 0; ti < mesh.triangles.size(); ti++) {
        if (mesh.tri_region[ti] != 0) continue;
        const auto& t = mesh.triangles[ti];
        out.triangles.push_back({use_node(t[0]), use_node(t[1]), use_node(t[2])});
        out.tri_region.push_back(0);
    }
    for (const MeshEdge& e : mesh.boundary_edges)
        if (remap[e.a] >= 0 && remap[e.b] >= 0)
            out.boundary_edges.push_back({remap[e.a], remap[e.b], e.tag});
    for (const MeshEdge& e : mesh.interface_edges)
        if (remap[e.a] >= 0 && remap[e.b] >= 0)
            out.boundary_edges.push_back({remap[e.a], remap[e.b], e.tag});
    return out;
}

}  // namespace probe
