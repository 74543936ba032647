#include "probe/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

namespace probe {

namespace {

std::vector<Vec2> midpoint_cells(const Vec2& lo, const Vec2& hi, double cell,
                                 const std::function<bool(const Vec2&)>& keep) {
    std::vector<Vec2> out;
    const int nx = std::max(1, int(std::ceil((hi.x - lo.x) / cell)));
    const int ny = std::max(1, int(std::ceil((hi.y - lo.y) / cell)));
    const double hx = (hi.x - lo.x) / nx;
    const double hy = (hi.y - lo.y) / ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 p{lo.x + (i + 0.5) * hx, lo.y + (j + 0.5) * hy};
            if (keep(p)) out.push_back(p);
        }
    return out;
}

double grad_energy(const NeedleSequence& seq, int n, const std::vector<Vec2>& cells, double w) {
    if (n < 1 || n > seq.length()) throw BlowupError("bad_data", "stage index out of range");
    const EntireBasis basis = seq.basis_for(n);
    const CVec& c = seq.coeffs[std::size_t(n - 1)];
    double e = 0.0;
    for (const Vec2& p : cells) {
        const ValueGrad vg = basis.combine(c, p);
        e += w * (std::norm(vg.dx) + std::norm(vg.dy));
    }
    return e;
}

std::vector<Vec2> cone_cells(const FiniteCone& cone, const Scene& scene, double& w) {
    if (!(cone.height > 0.0) || !(cone.aperture > 0.0) || !(cone.aperture < M_PI))
        throw BlowupError("bad_data", "cone needs height > 0 and aperture in ]0,pi[");
    const double cell = cone.height / 64.0;
    const Vec2 lo{cone.vertex.x - cone.height, cone.vertex.y - cone.height};
    const Vec2 hi{cone.vertex.x + cone.height, cone.vertex.y + cone.height};
    w = cell * cell;
    return midpoint_cells(lo, hi, cell, [&](const Vec2& p) {
        return cone_contains(cone, p) && scene.in_domain(p);
    });
}

std::vector<Vec2> ball_cells(const Vec2& center, double radius, const Scene& scene, double& w) {
    if (!(radius > 0.0)) throw BlowupError("bad_data", "ball radius must be positive");
    const double cell = radius / 64.0;
    const Vec2 lo{center.x - radius, center.y - radius};
    const Vec2 hi{center.x + radius, center.y + radius};
    w = cell * cell;
    return midpoint_cells(lo, hi, cell, [&](const Vec2& p) {
        return distance(center, p) < radius && scene.in_domain(p);
    });
}

EnergyTrace trace_over_cells(const NeedleSequence& seq, const std::vector<Vec2>& cells, double w,
                             std::string tag, int burn_in, double ratio_threshold) {
    EnergyTrace tr;
    tr.region = std::move(tag);
    for (int n = 1; n <= seq.length(); ++n) tr.values.push_back({n, grad_energy(seq, n, cells, w)});
    classify_growth(tr, burn_in, ratio_threshold);
    return tr;
}

}  // namespace

const char* growth_name(Growth g) { return g == Growth::divergent ? "divergent" : "bounded"; }

double cone_energy(const NeedleSequence& seq, int n, const FiniteCone& cone, const Scene& scene) {
    double w = 0.0;
    const auto cells = cone_cells(cone, scene, w);
    return grad_energy(seq, n, cells, w);
}

double ball_energy(const NeedleSequence& seq, int n, const Vec2& center, double radius,
                   const Scene& scene) {
    double w = 0.0;
    const auto cells = ball_cells(center, radius, scene, w);
    return grad_energy(seq, n, cells, w);
}

Growth classify_growth(EnergyTrace& trace, int burn_in, double ratio_threshold) {
    if (burn_in < 1 || !(ratio_threshold > 0.0))
        throw BlowupError("bad_data", "burn-in and ratio threshold must be positive");
    const int len = int(trace.values.size());
    if (len < burn_in + 3)
        throw BlowupError("insufficient_data", "growth call needs at least burn_in + 3 stages");
    std::size_t start = 0;
    while (start + 1 < trace.values.size() && trace.values[start].n < burn_in) ++start;

    const double floor = 1e-300;
    double sn = 0.0, se = 0.0, snn = 0.0, sne = 0.0;
    const double cnt = double(trace.values.size() - start);
    for (std::size_t i = start; i < trace.values.size(); ++i) {
        if (trace.values[i].energy < 0.0)
            throw BlowupError("bad_data", "negative energy in trace");
        const double x = trace.values[i].n;
        const double y = std::log(std::max(trace.values[i].energy, floor));
        sn += x;
        se += y;
        snn += x * x;
        sne += x * y;
    }
    const double denom = cnt * snn - sn * sn;
    trace.slope = denom > 0.0 ? (cnt * sne - sn * se) / denom : 0.0;

    const double e_burn = trace.values[start].energy;
    const double e_last = trace.values.back().energy;
    const double ratio = e_last / std::max(e_burn, floor);
    trace.classification = (ratio >= ratio_threshold && trace.slope > 0.0) ? Growth::divergent
                                                                           : Growth::bounded;
    return trace.classification;
}

EnergyTrace cone_trace(const NeedleSequence& seq, const FiniteCone& cone, const Scene& scene,
                       int burn_in, double ratio_threshold) {
    double w = 0.0;
    const auto cells = cone_cells(cone, scene, w);
    char tag[128];
    std::snprintf(tag, sizeof tag, "cone(%g,%g;ap=%g,h=%g)", cone.vertex.x, cone.vertex.y,
                  cone.aperture, cone.height);
    return trace_over_cells(seq, cells, w, tag, burn_in, ratio_threshold);
}

EnergyTrace ball_trace(const NeedleSequence& seq, const Vec2& center, double radius,
                       const Scene& scene, int burn_in, double ratio_threshold) {
    double w = 0.0;
    const auto cells = ball_cells(center, radius, scene, w);
    char tag[128];
    std::snprintf(tag, sizeof tag, "ball(%g,%g;r=%g)", center.x, center.y, radius);
    return trace_over_cells(seq, cells, w, tag, burn_in, ratio_threshold);
}

void save_energy_csv(const std::vector<EnergyTrace>& traces, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw BlowupError("io_error", "cannot open " + path);
    f << "n,energy,region\n";
    char buf[256];
    for (const EnergyTrace& tr : traces) {
        for (const EnergyRow& row : tr.values) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,", row.n, row.energy);
            f << buf << tr.region << "\n";
        }
    }
    if (!f) throw BlowupError("io_error", "write failed for " + path);
}

}  // namespace probe
