#include "probe/needle_sequence.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace probe {

namespace {

std::vector<Vec2> hex_lattice(const Vec2& lo, const Vec2& hi, double spacing) {
    std::vector<Vec2> pts;
    const double dy = spacing * std::sqrt(3.0) / 2.0;
    for (int j = 0;; ++j) {
        const double y = lo.y + dy * (j + 0.5);
        if (y >= hi.y) break;
        const double shift = (j % 2) ? 0.5 * spacing : 0.0;
        for (int i = 0;; ++i) {
            const double x = lo.x + spacing * (i + 0.5) + shift;
            if (x >= hi.x) break;
            pts.push_back({x, y});
        }
    }
    return pts;
}

double needle_min_distance(const Needle& needle, const Shape& compact) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < needle.vertices.size(); ++i)
        dmin = std::min(dmin, segment_min_signed_distance(compact, needle.vertices[i],
                                                          needle.vertices[i + 1]));
    return dmin;
}

struct NormalEq {
    Eigen::MatrixXcd H;
    CVec g;
    double btb = 0.0;
    std::size_t n_points = 0;
};

NormalEq build_normal_eq(const EntireBasis& basis, const std::vector<ControlPoint>& pts,
                         const Vec2& pole) {
    const int dim = basis.dim();
    NormalEq ne;
    ne.H = Eigen::MatrixXcd::Zero(dim, dim);
    ne.g = CVec::Zero(dim);
    ne.n_points = pts.size();
    const std::size_t chunk_pts = 1360;
    const auto udim = static_cast<std::size_t>(dim);
    std::vector<Complex> v(udim), gx(udim), gy(udim);
    for (std::size_t base = 0; base < pts.size(); base += chunk_pts) {
        const std::size_t cnt = std::min(chunk_pts, pts.size() - base);
        Eigen::MatrixXcd B(3 * cnt, dim);
        CVec r(3 * cnt);
        for (std::size_t q = 0; q < cnt; ++q) {
            const ControlPoint& cp = pts[base + q];
            basis.eval(cp.p, v.data(), gx.data(), gy.data());
            const ValueGrad G = fundamental_solution(basis.k(), pole, cp.p);
            const double sw = std::sqrt(cp.w);
            for (int j = 0; j < dim; ++j) {
                B(Eigen::Index(3 * q), j) = sw * v[std::size_t(j)];
                B(Eigen::Index(3 * q + 1), j) = sw * gx[std::size_t(j)];
                B(Eigen::Index(3 * q + 2), j) = sw * gy[std::size_t(j)];
            }
            r(Eigen::Index(3 * q)) = sw * G.value;
            r(Eigen::Index(3 * q + 1)) = sw * G.dx;
            r(Eigen::Index(3 * q + 2)) = sw * G.dy;
        }
        ne.H.noalias() += B.adjoint() * B;
        ne.g.noalias() += B.adjoint() * r;
        ne.btb += r.squaredNorm();
    }
    return ne;
}

StageFit solve_normal_eq(const NormalEq& ne, const EntireBasis& basis, double alpha_scale) {
    const int dim = basis.dim();
    StageFit out;
    out.report.order = basis.order();
    out.report.n_points = ne.n_points;
    out.report.alpha = alpha_scale * ne.H.trace().real() / dim;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ne.H);
    if (es.info() != Eigen::Success)
        throw SequenceError("fit_failed", "normal equations eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const double lmax = lam.maxCoeff();
    const double lmin = lam.minCoeff();
    out.report.condition = lmax / std::max(lmin, lmax * 1e-300);
    out.report.ill_conditioned = lmin <= lmax * 1e-14;

    const CVec gq = es.eigenvectors().adjoint() * ne.g;
    const Eigen::ArrayXd denom = (lam.array() + out.report.alpha).cwiseMax(1e-300);
    const CVec y = (gq.array() * denom.inverse().cast<Complex>()).matrix();
    out.coeffs = es.eigenvectors() * y;

    const double resid2 = std::max(
        0.0, out.coeffs.dot(ne.H * out.coeffs).real() - 2.0 * out.coeffs.dot(ne.g).real() + ne.btb);
    out.report.misfit = std::sqrt(resid2 / std::max(ne.btb, 1e-300));
    return out;
}

}  // namespace

double FitSchedule::delta(int n) const { return std::max(delta_start / n, delta_min); }

int FitSchedule::order(int n) const { return std::min(order_base + order_step * n, order_cap); }

double FitSchedule::alpha(int n) const {
    return std::max(alpha_scale * std::pow(10.0, 1.0 - n), alpha_floor);
}

void FitSchedule::validate() const {
    if (n_max < 1 || !(delta_start > 0.0) || !(delta_min > 0.0) || delta_min > delta_start ||
        order_base < 0 || order_step < 0 || order_cap < 1 || !(alpha_scale >= 0.0) ||
        !(alpha_floor >= 0.0) || !(standoff > 0.0) || !(rim_margin >= 0.0))
        throw SequenceError("bad_schedule", "fit schedule parameters out of range");
}

std::vector<ControlPoint> control_set(const Scene& scene, const Needle& needle, double delta,
                                      double spacing) {
    if (!(delta > 0.0) || !(spacing > 0.0))
        throw SequenceError("bad_data", "control set needs positive delta and spacing");
    std::vector<ControlPoint> out;
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    const double cell = spacing * spacing * std::sqrt(3.0) / 2.0;
    std::size_t interior = 0;
    for (const Vec2& p : hex_lattice(lo, hi, spacing)) {
        if (!scene.in_domain(p)) continue;
        if (needle.distance(p) < delta) continue;
        out.push_back({p, cell, false});
        ++interior;
    }
    if (interior == 0)
        throw SequenceError("empty_control_set",
                            "no control points left at delta " + std::to_string(delta));
    const auto bp = shape_boundary_points(scene.outer, spacing);
    const std::size_t nb = bp.size();
    for (std::size_t i = 0; i < nb; ++i) {
        if (needle.distance(bp[i]) < delta) continue;
        const Vec2& prev = bp[(i + nb - 1) % nb];
        const Vec2& next = bp[(i + 1) % nb];
        out.push_back({bp[i], 0.5 * (distance(prev, bp[i]) + distance(bp[i], next)), true});
    }
    return out;
}

std::vector<ControlPoint> control_set(const Scene& scene, const Needle& needle, int n,
                                      const FitSchedule& schedule) {
    schedule.validate();
    if (n < 1 || n > schedule.n_max)
        throw SequenceError("bad_data", "stage index outside the schedule");
    const double delta = schedule.delta(n);
    return control_set(scene, needle, delta, delta / 3.0);
}

StageFit fit_stage(const EntireBasis& basis, const std::vector<ControlPoint>& pts,
                   const Vec2& pole, double alpha_scale) {
    if (pts.empty()) throw SequenceError("empty_control_set", "stage fit got no control points");
    return solve_normal_eq(build_normal_eq(basis, pts, pole), basis, alpha_scale);
}

EntireBasis NeedleSequence::basis_for(int n) const {
    if (n < 1 || n > length()) throw SequenceError("bad_data", "stage index out of range");
    const int dim = int(coeffs[std::size_t(n - 1)].size());
    return EntireBasis(k, (dim - 1) / 2, basis_center, basis_rho);
}

ValueGrad NeedleSequence::evaluate(int n, const Vec2& y) const {
    if (n < 1 || n > length()) throw SequenceError("bad_data", "stage index out of range");
    return basis_for(n).combine(coeffs[std::size_t(n - 1)], y);
}

NeedleSequence fit_needle_sequence(const Scene& scene, const Needle& needle,
                                   const FitSchedule& schedule) {
    schedule.validate();
    NeedleSequence seq;
    seq.pole = needle.tip();
    seq.needle = needle;
    seq.k = scene.k;
    seq.schedule = schedule;
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    seq.basis_center = 0.5 * (lo + hi);
    double rho = 0.0;
    for (const Vec2& q : shape_boundary_points(scene.outer, scene.diameter() / 256.0))
        rho = std::max(rho, distance(seq.basis_center, q));
    seq.basis_rho = rho;

    // one cloud for every stage: interior lattice at fixed standoff from the needle,
    // outer rim left free, weights tapered toward the needle
    std::vector<ControlPoint> cloud;
    const double wref = 0.25 * scene.diameter() / 2.0;
    for (const ControlPoint& cp :
         control_set(scene, needle, schedule.standoff, schedule.standoff / 6.0)) {
        if (cp.on_boundary) continue;
        if (scene.outer_signed_distance(cp.p) > -schedule.rim_margin) continue;
        ControlPoint kept = cp;
        const double d = needle.distance(cp.p);
        kept.w *= std::min(1.0, (d / wref) * (d / wref));
        cloud.push_back(kept);
    }
    if (cloud.empty())
        throw SequenceError("empty_control_set", "standoff and rim margin left no control points");

    NormalEq ne;
    int built_order = -1;
    for (int n = 1; n <= schedule.n_max; ++n) {
        const int order = schedule.order(n);
        const EntireBasis basis(seq.k, order, seq.basis_center, seq.basis_rho);
        if (order != built_order) {
            ne = build_normal_eq(basis, cloud, seq.pole);
            built_order = order;
        }
        StageFit stage = solve_normal_eq(ne, basis, schedule.alpha(n));
        stage.report.n = n;
        stage.report.delta = schedule.delta(n);
        seq.coeffs.push_back(std::move(stage.coeffs));
        seq.reports.push_back(stage.report);
    }
    return seq;
}

ConvergenceReport convergence_report(const NeedleSequence& seq, const Scene& scene,
                                     const Shape& compact, double spacing) {
    if (seq.length() == 0) throw SequenceError("bad_data", "empty sequence");
    ConvergenceReport rep;
    rep.compact_needle_dist = needle_min_distance(seq.needle, compact);
    if (!(rep.compact_needle_dist > 0.0))
        throw SequenceError("compact_touches_needle",
                            "compact set meets the needle; misfit is undefined there");

    // one lattice anchored at the scene bbox, so nested compacts sample nested sets
    Vec2 lo, hi;
    shape_bbox(scene.outer, lo, hi);
    std::vector<Vec2> pts;
    double s = spacing;
    for (int attempt = 0; attempt < 7 && pts.empty(); ++attempt) {
        for (const Vec2& p : hex_lattice(lo, hi, s))
            if (shape_contains(compact, p) && scene.in_domain(p)) pts.push_back(p);
        if (pts.empty()) s *= 0.5;
    }
    if (pts.empty()) throw SequenceError("bad_data", "compact set has no sample points");
    const double w = s * s * std::sqrt(3.0) / 2.0;

    for (int n = 1; n <= seq.length(); ++n) {
        MisfitRow row;
        row.n = n;
        double sv = 0.0, sg = 0.0;
        const EntireBasis basis = seq.basis_for(n);
        for (const Vec2& p : pts) {
            const ValueGrad vn = basis.combine(seq.coeffs[std::size_t(n - 1)], p);
            const ValueGrad G = fundamental_solution(seq.k, seq.pole, p);
            sv += w * std::norm(vn.value - G.value);
            sg += w * (std::norm(vn.dx - G.dx) + std::norm(vn.dy - G.dy));
        }
        row.value = std::sqrt(sv);
        row.gradient = std::sqrt(sg);
        row.h1 = std::sqrt(sv + sg);
        rep.rows.push_back(row);
    }

    rep.burn_in = seq.length();
    for (int n = 1; n <= seq.length(); ++n)
        if (seq.schedule.delta(n) <= rep.compact_needle_dist) {
            rep.burn_in = n;
            break;
        }
    rep.monotone_after_burn_in = true;
    for (std::size_t i = std::size_t(rep.burn_in); i < rep.rows.size(); ++i)
        if (rep.rows[i].h1 > rep.rows[i - 1].h1 * (1.0 + 1e-12)) rep.monotone_after_burn_in = false;
    return rep;
}

std::vector<ConvergenceReport> convergence_report(const NeedleSequence& seq, const Scene& scene,
                                                  const std::vector<Shape>& compacts,
                                                  double spacing) {
    std::vector<ConvergenceReport> out;
    out.reserve(compacts.size());
    for (const Shape& c : compacts) out.push_back(convergence_report(seq, scene, c, spacing));
    return out;
}

void save_sequence_csv(const NeedleSequence& seq, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SequenceError("io_error", "cannot open " + path);
    char buf[512];
    f << "# probelab needle sequence v2\n";
    std::snprintf(buf, sizeof buf, "# k=%.17g\n", seq.k);
    f << buf;
    std::snprintf(buf, sizeof buf, "# pole=%.17g,%.17g\n", seq.pole.x, seq.pole.y);
    f << buf;
    std::snprintf(buf, sizeof buf, "# basis=%.17g,%.17g,%.17g\n", seq.basis_center.x,
                  seq.basis_center.y, seq.basis_rho);
    f << buf;
    std::snprintf(buf, sizeof buf, "# schedule=%d,%.17g,%.17g,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                  seq.schedule.n_max, seq.schedule.delta_start, seq.schedule.delta_min,
                  seq.schedule.order_base, seq.schedule.order_step, seq.schedule.order_cap,
                  seq.schedule.alpha_scale, seq.schedule.alpha_floor, seq.schedule.standoff,
                  seq.schedule.rim_margin);
    f << buf;
    f << "# needle=";
    for (std::size_t i = 0; i < seq.needle.vertices.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", i ? ";" : "", seq.needle.vertices[i].x,
                      seq.needle.vertices[i].y);
        f << buf;
    }
    f << "\nn,m,re,im\n";
    for (int n = 1; n <= seq.length(); ++n) {
        const CVec& c = seq.coeffs[std::size_t(n - 1)];
        const int N = (int(c.size()) - 1) / 2;
        for (int m = -N; m <= N; ++m) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", n, m, c(N + m).real(),
                          c(N + m).imag());
            f << buf;
        }
    }
    if (!f) throw SequenceError("io_error", "write failed for " + path);
}

NeedleSequence load_sequence_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SequenceError("io_error", "cannot open " + path);
    NeedleSequence seq;
    std::string line;
    if (!std::getline(f, line) || line.rfind("# probelab needle sequence", 0) != 0)
        throw SequenceError("bad_data", "not a needle sequence file: " + path);
    std::map<int, std::vector<std::tuple<int, double, double>>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "k") {
                seq.k = std::stod(val);
            } else if (key == "pole") {
                std::sscanf(val.c_str(), "%lf,%lf", &seq.pole.x, &seq.pole.y);
            } else if (key == "basis") {
                std::sscanf(val.c_str(), "%lf,%lf,%lf", &seq.basis_center.x, &seq.basis_center.y,
                            &seq.basis_rho);
            } else if (key == "schedule") {
                std::sscanf(val.c_str(), "%d,%lf,%lf,%d,%d,%d,%lf,%lf,%lf,%lf",
                            &seq.schedule.n_max, &seq.schedule.delta_start,
                            &seq.schedule.delta_min, &seq.schedule.order_base,
                            &seq.schedule.order_step, &seq.schedule.order_cap,
                            &seq.schedule.alpha_scale, &seq.schedule.alpha_floor,
                            &seq.schedule.standoff, &seq.schedule.rim_margin);
            } else if (key == "needle") {
                std::stringstream ss(val);
                std::string tok;
                while (std::getline(ss, tok, ';')) {
                    Vec2 p;
                    if (std::sscanf(tok.c_str(), "%lf,%lf", &p.x, &p.y) == 2)
                        seq.needle.vertices.push_back(p);
                }
            }
            continue;
        }
        if (line.rfind("n,m", 0) == 0) continue;
        int n = 0, m = 0;
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &n, &m, &re, &im) != 4)
            throw SequenceError("bad_data", "malformed row: " + line);
        rows[n].push_back({m, re, im});
    }
    if (seq.needle.vertices.size() >= 2) {
        seq.needle.cum.assign(seq.needle.vertices.size(), 0.0);
        double total = 0.0;
        for (std::size_t i = 1; i < seq.needle.vertices.size(); ++i) {
            total += distance(seq.needle.vertices[i - 1], seq.needle.vertices[i]);
            seq.needle.cum[i] = total;
        }
        if (total > 0.0)
            for (double& c : seq.needle.cum) c /= total;
    }
    int expect = 1;
    for (const auto& [n, entries] : rows) {
        if (n != expect++) throw SequenceError("bad_data", "non-contiguous stage indices");
        int mmax = 0;
        for (const auto& [m, re, im] : entries) mmax = std::max(mmax, std::abs(m));
        CVec c = CVec::Zero(2 * mmax + 1);
        for (const auto& [m, re, im] : entries) c(mmax + m) = Complex(re, im);
        seq.coeffs.push_back(c);
    }
    if (seq.coeffs.empty()) throw SequenceError("bad_data", "no coefficient rows in " + path);
    return seq;
}

}  // namespace probe
