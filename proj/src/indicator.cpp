#include "probe/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <variant>

namespace probe {

namespace {

void require_matching_bases(const DtNMatrix& a, const DtNMatrix& b) {
    const bool same_frame = [&] {
        if (a.kind != b.kind || a.dim() != b.dim()) return false;
        if (a.kind == TraceBasisKind::trig_modes)
            return a.n_modes == b.n_modes && std::abs(a.R - b.R) < 1e-12 &&
                   distance(a.center, b.center) < 1e-12;
        if (a.nodes.size() != b.nodes.size()) return false;
        for (std::size_t i = 0; i < a.nodes.size(); ++i)
            if (distance(a.nodes[i], b.nodes[i]) > 1e-12) return false;
        return true;
    }();
    if (!same_frame)
        throw IndicatorError("basis_mismatch", "measurement maps use different trace bases");
}

}  // namespace

CVec boundary_trace(const NeedleSequence& seq, int n, const DtNMatrix& dtn) {
    if (n < 1 || n > seq.length()) throw IndicatorError("bad_data", "stage index out of range");
    if (dtn.kind == TraceBasisKind::boundary_hats) {
        CVec f(Eigen::Index(dtn.nodes.size()));
        for (std::size_t i = 0; i < dtn.nodes.size(); ++i)
            f(Eigen::Index(i)) = seq.evaluate(n, dtn.nodes[i]).value;
        return f;
    }
    const EntireBasis basis = seq.basis_for(n);
    const CVec& c = seq.coeffs[std::size_t(n - 1)];
    const int nm = dtn.n_modes;
    // uniform quadrature is exact once it out-resolves the trace modes
    const int quad = 4 * (basis.order() + nm) + 64;
    CVec f = CVec::Zero(2 * nm + 1);
    for (int j = 0; j < quad; ++j) {
        const double theta = 2.0 * M_PI * j / quad;
        const Vec2 y{dtn.center.x + dtn.R * std::cos(theta), dtn.center.y + dtn.R * std::sin(theta)};
        const Complex v = basis.combine(c, y).value;
        for (int l = -nm; l <= nm; ++l) f(l + nm) += v * std::polar(1.0 / quad, -l * theta);
    }
    return f;
}

IndicatorTrace indicator_sequence(const NeedleSequence& seq, const DtNMatrix& lambda0,
                                  const DtNMatrix& lambda_d, const DivergenceRule& rule) {
    require_matching_bases(lambda0, lambda_d);
    const DtNMatrix diff = dtn_difference(lambda0, lambda_d);

    IndicatorTrace tr;
    tr.probe = seq.pole;
    tr.needle = seq.needle;
    EnergyTrace growth;
    growth.region = "indicator";
    for (int n = 1; n <= seq.length(); ++n) {
        const CVec f = boundary_trace(seq, n, lambda0);
        const Complex in = dtn_pairing_sesquilinear(diff, f);
        tr.values.push_back({n, in});
        growth.values.push_back({n, std::abs(in)});
    }
    classify_growth(growth, rule.burn_in, rule.ratio_threshold);
    tr.slope = growth.slope;
    tr.classification = growth.classification;
    tr.limit = tr.values.back().value;
    return tr;
}

const char* point_class_name(PointClass c) {
    return c == PointClass::outside ? "outside" : "inside_or_boundary";
}

PointClass classify_point(const IndicatorTrace& trace) {
    return trace.classification == Growth::bounded ? PointClass::outside
                                                   : PointClass::inside_or_boundary;
}

FitSchedule sweep_schedule() {
    FitSchedule s;
    s.n_max = 6;
    return s;
}

IndicatorProfile indicator_profile(const Scene& scene, const Needle& needle,
                                   const DtNMatrix& lambda0, const DtNMatrix& lambda_d,
                                   const std::vector<double>& t_grid, const FitSchedule& schedule,
                                   const DivergenceRule& rule) {
    if (t_grid.empty()) throw IndicatorError("bad_data", "empty parameter grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || !(t_grid[i] < 1.0))
            throw IndicatorError("bad_data", "profile parameters must lie in ]0,1[");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw IndicatorError("bad_data", "profile parameters must increase");
    }
    IndicatorProfile prof;
    double ref_level = -1.0;
    for (const double t : t_grid) {
        const Needle sub = needle.truncated(t);
        const NeedleSequence seq = fit_needle_sequence(scene, sub, schedule);
        const IndicatorTrace tr = indicator_sequence(seq, lambda0, lambda_d, rule);
        const double a = std::abs(tr.limit);
        bool flag = tr.classification == Growth::divergent;
        if (ref_level < 0.0)
            ref_level = a;  // shallowest truncation sets the bounded reference level
        else if (ref_level > 0.0 && a > rule.limit_bound_factor * ref_level)
            flag = true;
        prof.rows.push_back({t, tr.limit, a, tr.classification});
        if (flag && prof.t_hat == 1.0) prof.t_hat = t;
    }
    return prof;
}

NeedleSequence rotate_sequence(const NeedleSequence& seq, double phi) {
    NeedleSequence out = seq;
    const Vec2 c0 = seq.basis_center;
    out.pole = c0 + (seq.pole - c0).rotated(phi);
    for (Vec2& v : out.needle.vertices) v = c0 + (v - c0).rotated(phi);
    for (CVec& c : out.coeffs) {
        const int nm = (int(c.size()) - 1) / 2;
        for (int m = -nm; m <= nm; ++m) c(nm + m) *= std::polar(1.0, -m * phi);
    }
    return out;
}

std::vector<Vec2> IndicatorField::estimated_region() const {
    std::vector<Vec2> out;
    for (const FieldPoint& fp : points)
        if (fp.classification == Growth::divergent) out.push_back(fp.p);
    return out;
}

namespace {

bool segment_grazes(const Vec2& a, const Vec2& b, const Vec2& tip,
                    const std::vector<Vec2>& flagged, double clearance) {
    for (const Vec2& q : flagged) {
        if (distance(q, tip) < 2.0 * clearance) continue;  // the tip region is exempt
        if (dist_point_segment(q, a, b) < clearance) return true;
    }
    return false;
}

bool tip_in_flagged(const Vec2& tip, const std::vector<Vec2>& flagged, double clearance) {
    for (const Vec2& q : flagged)
        if (distance(q, tip) < 2.0 * clearance) return true;
    return false;
}

struct NeedleChoice {
    Needle needle;
    bool deflected = false;
};

// straight needle from the nearest outer point, bent around flagged regions when
// the straight run would graze one away from its own tip
NeedleChoice choose_needle(const Scene& scene, const Vec2& anchor, const Vec2& tip,
                           const std::vector<Vec2>& flagged, double clearance,
                           const Disc* disc, double rmax) {
    NeedleChoice out;
    const bool tip_flagged = tip_in_flagged(tip, flagged, clearance);
    if (tip_flagged || !segment_grazes(anchor, tip, tip, flagged, clearance)) {
        out.needle = make_needle({anchor, tip}, scene);
        return out;
    }
    if (disc) {
        const Vec2 c0 = disc->center;
        const double r_tip = distance(tip, c0);
        const double r_w = 0.5 * (r_tip + rmax);
        const double phi_tip = std::atan2(tip.y - c0.y, tip.x - c0.x);
        for (int j = 1; j <= 8; ++j) {
            for (int sign : {1, -1}) {
                const double phi_w = phi_tip + sign * j * 2.0 * clearance / r_w;
                const Vec2 w = c0 + Vec2{r_w * std::cos(phi_w), r_w * std::sin(phi_w)};
                const Vec2 a =
                    c0 + Vec2{disc->radius * std::cos(phi_w), disc->radius * std::sin(phi_w)};
                if (segment_grazes(a, w, tip, flagged, clearance) ||
                    segment_grazes(w, tip, tip, flagged, clearance))
                    continue;
                out.needle = make_needle({a, w, tip}, scene);
                out.deflected = true;
                return out;
            }
        }
    }
    out.needle = make_needle({anchor, tip}, scene);  // no clear detour; keep the straight run
    return out;
}

}  // namespace

IndicatorField reconstruct(const Scene& scene, const DtNMatrix& lambda0,
                           const DtNMatrix& lambda_d, const ReconstructOptions& opts) {
    if (!(opts.spacing > 0.0) || !(opts.margin >= 0.0))
        throw IndicatorError("bad_data", "grid spacing must be positive");
    require_matching_bases(lambda0, lambda_d);

    IndicatorField field;
    field.spacing = opts.spacing;
    std::vector<Vec2> flagged;
    const double clearance = opts.spacing;
    const Disc* disc = std::get_if<Disc>(&scene.outer);

    // the shallowest band of probes calibrates the bounded level for the value flag
    double ref_level = -1.0;
    auto median_abs = [&](std::size_t first) {
        std::vector<double> v;
        for (std::size_t i = first; i < field.points.size(); ++i)
            v.push_back(field.points[i].abs_last);
        if (v.empty()) return 0.0;
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    auto flag_by_value = [&](const IndicatorTrace& tr) {
        return ref_level > 0.0 && std::abs(tr.limit) > opts.rule.limit_bound_factor * ref_level;
    };

    if (disc) {
        const Vec2 c0 = disc->center;
        const double rmax = disc->radius - opts.margin;
        // outside-in so deeper needles see the shallow classifications
        for (double r = rmax; r > 0.999 * opts.spacing; r -= opts.spacing) {
            const int mphi = std::max(6, int(std::ceil(2.0 * M_PI * r / opts.spacing)));
            const std::size_t ring_start = field.points.size();
            NeedleSequence ref;
            bool have_ref = false;
            for (int j = 0; j < mphi; ++j) {
                const double phi = 2.0 * M_PI * j / mphi;
                const Vec2 tip = c0 + Vec2{r * std::cos(phi), r * std::sin(phi)};
                const Vec2 anchor =
                    c0 + Vec2{disc->radius * std::cos(phi), disc->radius * std::sin(phi)};
                const NeedleChoice nc = choose_needle(scene, anchor, tip, flagged, clearance,
                                                      disc, rmax);
                NeedleSequence seq;
                if (nc.deflected) {
                    seq = fit_needle_sequence(scene, nc.needle, opts.schedule);
                } else {
                    if (!have_ref) {
                        const Needle base = make_needle(
                            {c0 + Vec2{disc->radius, 0.0}, c0 + Vec2{r, 0.0}}, scene);
                        ref = fit_needle_sequence(scene, base, opts.schedule);
                        have_ref = true;
                    }
                    seq = rotate_sequence(ref, phi);
                }
                const IndicatorTrace tr = indicator_sequence(seq, lambda0, lambda_d, opts.rule);
                const bool div = tr.classification == Growth::divergent || flag_by_value(tr);
                field.points.push_back({tip, div ? Growth::divergent : tr.classification,
                                        std::abs(tr.limit), nc.deflected});
                if (div) flagged.push_back(tip);
            }
            if (ref_level < 0.0) ref_level = median_abs(ring_start);
        }
        return field;
    }

    // generic domains: square lattice, no rotation shortcut
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    const auto ring = shape_boundary_points(scene.outer, opts.spacing / 2.0);
    std::vector<Vec2> grid;
    for (double y = lo.y; y <= hi.y; y += opts.spacing)
        for (double x = lo.x; x <= hi.x; x += opts.spacing) {
            const Vec2 p{x, y};
            if (shape_signed_distance(scene.outer, p) <= -opts.margin) grid.push_back(p);
        }
    std::sort(grid.begin(), grid.end(), [&](const Vec2& a, const Vec2& b) {
        return shape_signed_distance(scene.outer, a) > shape_signed_distance(scene.outer, b);
    });
    std::size_t band_end = grid.size();
    if (!grid.empty()) {
        const double sd0 = shape_signed_distance(scene.outer, grid.front());
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (shape_signed_distance(scene.outer, grid[i]) < sd0 - opts.spacing) {
                band_end = i;
                break;
            }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i == band_end && ref_level < 0.0) ref_level = median_abs(0);
        const Vec2& tip = grid[i];
        Vec2 anchor = ring.front();
        for (const Vec2& q : ring)
            if (distance(q, tip) < distance(anchor, tip)) anchor = q;
        const NeedleChoice nc = choose_needle(scene, anchor, tip, flagged, clearance, nullptr, 0.0);
        const NeedleSequence seq = fit_needle_sequence(scene, nc.needle, opts.schedule);
        const IndicatorTrace tr = indicator_sequence(seq, lambda0, lambda_d, opts.rule);
        const bool div = tr.classification == Growth::divergent || flag_by_value(tr);
        field.points.push_back(
            {tip, div ? Growth::divergent : tr.classification, std::abs(tr.limit), nc.deflected});
        if (div) flagged.push_back(tip);
    }
    return field;
}

void save_field_csv(const IndicatorField& field, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IndicatorError("io_error", "cannot open " + path);
    f << "x,y,class,abs_last\n";
    char buf[256];
    for (const FieldPoint& fp : field.points) {
        const PointClass pc = fp.classification == Growth::divergent
                                  ? PointClass::inside_or_boundary
                                  : PointClass::outside;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", fp.p.x, fp.p.y,
                      point_class_name(pc), fp.abs_last);
        f << buf;
    }
    if (!f) throw IndicatorError("io_error", "write failed for " + path);
}

namespace {

void svg_shape(std::ofstream& f, const Shape& s, const char* style,
               const std::function<Vec2(const Vec2&)>& map, double scale) {
    char buf[512];
    if (const Disc* d = std::get_if<Disc>(&s)) {
        const Vec2 c = map(d->center);
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" %s/>\n", c.x,
                      c.y, d->radius * scale, style);
        f << buf;
        return;
    }
    const Polygon& poly = std::get<Polygon>(s);
    f << "<path d=\"";
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
        const Vec2 q = map(poly.vertices[i]);
        std::snprintf(buf, sizeof buf, "%c%.2f %.2f ", i ? 'L' : 'M', q.x, q.y);
        f << buf;
    }
    f << "Z\" " << style << "/>\n";
}

}  // namespace

void save_field_svg(const IndicatorField& field, const Scene& scene, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IndicatorError("io_error", "cannot open " + path);
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    const double span = std::max(hi.x - lo.x, hi.y - lo.y);
    const double view = 640.0;
    const double scale = view / (1.1 * span);
    const Vec2 mid = 0.5 * (lo + hi);
    auto map = [&](const Vec2& p) -> Vec2 {
        return {view / 2 + (p.x - mid.x) * scale, view / 2 - (p.y - mid.y) * scale};
    };
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  view, view, view, view);
    f << buf;
    svg_shape(f, scene.outer, "fill=\"none\" stroke=\"#222\" stroke-width=\"2\"", map, scale);
    for (const Shape& obs : scene.obstacles)
        svg_shape(f, obs,
                  "fill=\"none\" stroke=\"#888\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"",
                  map, scale);
    const double dot = std::max(2.0, 0.35 * field.spacing * scale);
    for (const FieldPoint& fp : field.points) {
        const Vec2 q = map(fp.p);
        const char* fill = fp.classification == Growth::divergent ? "#c0392b" : "#2d6cdf";
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"%s/>\n", q.x, q.y,
                      dot, fill,
                      fp.deflected ? " stroke=\"#222\" stroke-width=\"1\"" : "");
        f << buf;
    }
    f << "</svg>\n";
    if (!f) throw IndicatorError("io_error", "write failed for " + path);
}

}  // namespace probe
