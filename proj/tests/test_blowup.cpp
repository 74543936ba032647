#include "doctest.h"

#include "probe/blowup.hpp"
#include "probe/geometry.hpp"
#include "probe/needle_sequence.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace probe;

namespace {

Scene unit_disc_scene() {
    Scene s;
    s.outer = Disc{{0.0, 0.0}, 1.0};
    s.k = 0.0;
    return s;
}

// stage-1 coefficients pinned by hand; basis is monomials (z^m, conj z^m) at rho=1
NeedleSequence mode_sequence(std::vector<Complex> coeffs) {
    NeedleSequence seq;
    seq.pole = {0.5, 0.0};
    seq.needle.vertices = {{1.0, 0.0}, {0.5, 0.0}};
    seq.needle.cum = {0.0, 1.0};
    seq.k = 0.0;
    seq.basis_center = {0.0, 0.0};
    seq.basis_rho = 1.0;
    CVec c(Eigen::Index(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i) c(Eigen::Index(i)) = coeffs[i];
    seq.coeffs.push_back(c);
    seq.reports.push_back({});
    return seq;
}

EnergyTrace make_trace(std::vector<double> energies) {
    EnergyTrace tr;
    tr.region = "hand";
    int n = 1;
    for (double e : energies) tr.values.push_back({n++, e});
    return tr;
}

}  // namespace

TEST_CASE("cone and ball energies match closed forms for polynomial modes") {
    const Scene scene = unit_disc_scene();
    // v = z: |grad v|^2 = 2 everywhere
    const NeedleSequence lin = mode_sequence({Complex(0), Complex(0), Complex(1)});

    const FiniteCone cone{{0.0, 0.0}, {1.0, 0.0}, M_PI / 2, 0.5};
    const double sector_area = 0.5 * (M_PI / 2) * 0.5 * 0.5;
    CHECK(cone_energy(lin, 1, cone, scene) == doctest::Approx(2.0 * sector_area).epsilon(0.01));

    CHECK(ball_energy(lin, 1, {0.1, 0.05}, 0.2, scene) ==
          doctest::Approx(2.0 * M_PI * 0.04).epsilon(0.01));

    // constant mode has zero gradient exactly
    const NeedleSequence flat = mode_sequence({Complex(0), Complex(3.0, -1.0), Complex(0)});
    CHECK(cone_energy(flat, 1, cone, scene) == 0.0);
    CHECK(ball_energy(flat, 1, {0.1, 0.05}, 0.2, scene) == 0.0);

    // empty intersection with the domain counts as zero
    CHECK(ball_energy(lin, 1, {5.0, 5.0}, 0.2, scene) == 0.0);

    // clipping: ball centered on the rim keeps roughly half its area
    const double clipped = ball_energy(lin, 1, {1.0, 0.0}, 0.2, scene);
    CHECK(clipped == doctest::Approx(M_PI * 0.04).epsilon(0.03));

    CHECK_THROWS_AS(static_cast<void>(ball_energy(lin, 1, {0.0, 0.0}, -0.1, scene)), BlowupError);
    CHECK_THROWS_AS(static_cast<void>(cone_energy(lin, 0, cone, scene)), BlowupError);
}

TEST_CASE("halving the quadrature cell moves smooth-mode energies by under a percent") {
    const Scene scene = unit_disc_scene();
    // v = z^2 has non-constant gradient, |grad v|^2 = 8 |z|^2
    const NeedleSequence quad =
        mode_sequence({Complex(0), Complex(0), Complex(0), Complex(0), Complex(1)});
    const FiniteCone cone{{0.2, 0.1}, {1.0, 0.5}, M_PI / 3, 0.4};
    const double coarse = cone_energy(quad, 1, cone, scene);

    // independent midpoint quadrature at half the cell
    const double cell = cone.height / 128.0;
    const EntireBasis basis = quad.basis_for(1);
    double fine = 0.0;
    for (double x = cone.vertex.x - cone.height; x < cone.vertex.x + cone.height; x += cell)
        for (double y = cone.vertex.y - cone.height; y < cone.vertex.y + cone.height; y += cell) {
            const Vec2 p{x + cell / 2, y + cell / 2};
            if (!cone_contains(cone, p) || !scene.in_domain(p)) continue;
            const ValueGrad vg = basis.combine(quad.coeffs[0], p);
            fine += cell * cell * (std::norm(vg.dx) + std::norm(vg.dy));
        }
    CHECK(coarse == doctest::Approx(fine).epsilon(0.01));
}

TEST_CASE("kernel gradient energy over an annular sector follows the log law") {
    // midpoint quadrature in polar coordinates around the pole
    const Vec2 pole{0.3, -0.2};
    const double r0 = 0.01, r1 = 0.1, theta = M_PI / 2;
    const int nr = 400, nt = 200;
    double e = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double r = r0 + (r1 - r0) * (i + 0.5) / nr;
        for (int j = 0; j < nt; ++j) {
            const double th = theta * (j + 0.5) / nt;
            const Vec2 p{pole.x + r * std::cos(th), pole.y + r * std::sin(th)};
            const ValueGrad g = fundamental_solution(0.0, pole, p);
            e += (std::norm(g.dx) + std::norm(g.dy)) * r * ((r1 - r0) / nr) * (theta / nt);
        }
    }
    CHECK(e == doctest::Approx(std::log(10.0) / (8.0 * M_PI)).epsilon(1e-3));
}

TEST_CASE("growth classifier follows the ratio-and-slope rule") {
    auto flat = make_trace({1, 1, 1, 1, 1, 1});
    CHECK(classify_growth(flat, 1, 10.0) == Growth::bounded);
    CHECK(flat.slope == doctest::Approx(0.0));

    auto geom = make_trace({1, 2, 4, 8, 16, 32});
    CHECK(classify_growth(geom, 1, 10.0) == Growth::divergent);
    CHECK(geom.slope == doctest::Approx(std::log(2.0)).epsilon(1e-9));

    // positive slope but ratio 5 < 10
    auto wobble = make_trace({1, 3, 2, 4, 3, 5});
    CHECK(classify_growth(wobble, 1, 10.0) == Growth::bounded);
    CHECK(wobble.slope > 0.0);

    // big ratio but downward trend past burn-in
    auto spike = make_trace({1e-6, 1e-6, 100.0, 90.0, 80.0, 70.0, 60.0, 50.0});
    CHECK(classify_growth(spike, 3, 10.0) == Growth::bounded);

    auto zeros = make_trace({0, 0, 0, 0, 0, 0});
    CHECK(classify_growth(zeros, 1, 10.0) == Growth::bounded);
    CHECK(std::isfinite(zeros.slope));

    auto short_trace = make_trace({1, 2, 3, 4, 5});
    CHECK_THROWS_WITH_AS(static_cast<void>(classify_growth(short_trace, 3, 10.0)),
                         doctest::Contains("burn_in"), BlowupError);
    auto bad = make_trace({1, 2, -1, 4, 5, 6});
    CHECK_THROWS_AS(static_cast<void>(classify_growth(bad, 1, 10.0)), BlowupError);
}

TEST_CASE("needle-tube cones and mid-needle balls diverge, off-needle balls stay bounded") {
    const Scene scene = unit_disc_scene();
    Needle needle;
    needle.vertices = {{1.0, 0.0}, {0.7, 0.0}};
    needle.cum = {0.0, 1.0};
    FitSchedule sched;
    const NeedleSequence seq = fit_needle_sequence(scene, needle, sched);

    std::vector<EnergyTrace> traces;
    for (double aperture : {M_PI / 6, M_PI / 2}) {
        const FiniteCone cone{{0.7, 0.0}, {1.0, 0.0}, aperture, 0.2};
        traces.push_back(cone_trace(seq, cone, scene));
        const EnergyTrace& tr = traces.back();
        CHECK(tr.classification == Growth::divergent);
        CHECK(tr.slope > 0.0);
        CHECK(tr.values.back().energy > 10.0 * tr.values[2].energy);
        for (const EnergyRow& row : tr.values) CHECK(row.energy >= 0.0);
    }

    // mid-needle ball
    traces.push_back(ball_trace(seq, {0.85, 0.0}, 0.1, scene));
    CHECK(traces.back().classification == Growth::divergent);

    // balls at distance >= 0.2 from the needle settle to the kernel energy
    for (Vec2 c : {Vec2{0.5, 0.35}, Vec2{0.7, 0.3}, Vec2{-0.3, 0.0}}) {
        traces.push_back(ball_trace(seq, c, 0.1, scene));
        const EnergyTrace& tr = traces.back();
        CHECK(tr.classification == Growth::bounded);
        CHECK(tr.values.back().energy <= 3.0 * tr.values[2].energy);
    }

    // a cone aimed away from the needle grows too slowly for the finite-n rule:
    // the energy rises monotonically (the kernel log tail) but stays sub-threshold
    const FiniteCone away{{0.7, 0.0}, {-1.0, 0.0}, M_PI / 2, 0.2};
    traces.push_back(cone_trace(seq, away, scene));
    const EnergyTrace& atr = traces.back();
    CHECK(atr.slope > 0.0);
    for (std::size_t i = 1; i < 8; ++i) CHECK(atr.values[i].energy >= atr.values[i - 1].energy);
    CHECK(atr.classification == Growth::bounded);

    const auto path = std::filesystem::temp_directory_path() / "probelab_energy_traces.csv";
    save_energy_csv(traces, path.string());
    std::ifstream f(path.string());
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);
    CHECK(line == "n,energy,region");
    int rows = 0;
    while (std::getline(f, line))
        if (!line.empty()) ++rows;
    CHECK(rows == int(traces.size()) * seq.length());
    f.close();
    std::filesystem::remove(path);
}
