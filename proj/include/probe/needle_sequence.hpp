#pragma once

#include "probe/basis.hpp"
#include "probe/geometry.hpp"

#include <string>
#include <vector>

namespace probe {

class SequenceError : public std::runtime_error {
  public:
    SequenceError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

// delta(n) = max(delta_start / n, delta_min) is the nominal tube radius per stage.
// The fit itself keeps a fixed standoff from the needle and a free band along the
// outer boundary; stages are driven by the order ramp
//   order(n) = min(order_base + order_step * n, order_cap)
// and a regularization ladder alpha(n) = max(alpha_scale * 10^(1-n), alpha_floor).
struct FitSchedule {
    int n_max = 10;
    double delta_start = 0.25;
    double delta_min = 0.02;
    int order_base = 40;
    int order_step = 20;
    int order_cap = 200;
    double alpha_scale = 1e-8;
    double alpha_floor = 1e-15;
    double standoff = 0.1;
    double rim_margin = 0.1;

    double delta(int n) const;
    int order(int n) const;
    double alpha(int n) const;
    void validate() const;
};

struct ControlPoint {
    Vec2 p;
    double w = 0.0;
    bool on_boundary = false;
};

// Hex lattice over the background domain plus boundary samples, keeping points
// at distance >= delta from the needle. Weights are cell areas (arc shares on
// the boundary). Throws SequenceError("empty_control_set") when nothing is left.
std::vector<ControlPoint> control_set(const Scene& scene, const Needle& needle, double delta,
                                      double spacing);
std::vector<ControlPoint> control_set(const Scene& scene, const Needle& needle, int n,
                                      const FitSchedule& schedule);

struct FitReport {
    int n = 0;
    double delta = 0.0;
    int order = 0;
    double alpha = 0.0;
    double condition = 0.0;
    bool ill_conditioned = false;
    double misfit = 0.0;
    std::size_t n_points = 0;
};

struct NeedleSequence {
    Vec2 pole;
    Needle needle;
    double k = 0.0;
    FitSchedule schedule;
    Vec2 basis_center;
    double basis_rho = 0.0;
    std::vector<CVec> coeffs;  // index n-1
    std::vector<FitReport> reports;

    int length() const { return int(coeffs.size()); }
    EntireBasis basis_for(int n) const;
    ValueGrad evaluate(int n, const Vec2& y) const;
};

struct StageFit {
    CVec coeffs;
    FitReport report;
};

// One weighted regularized least-squares fit of the basis against G_k(. - pole)
// over a fixed control cloud. The pole may sit anywhere off the cloud.
StageFit fit_stage(const EntireBasis& basis, const std::vector<ControlPoint>& pts,
                   const Vec2& pole, double alpha_scale);

// Regularized least-squares fits of entire solutions to G_k(. - tip). All stages
// share one control cloud: an interior lattice kept schedule.standoff away from the
// needle and schedule.rim_margin away from the outer boundary, with cell weights
// tapered near the needle. Stages differ only in basis order and regularization,
// which makes the misfit on any fixed compact decrease monotonically.
// Ill-conditioned stages are reported, not fatal.
NeedleSequence fit_needle_sequence(const Scene& scene, const Needle& needle,
                                   const FitSchedule& schedule = {});

struct MisfitRow {
    int n = 0;
    double value = 0.0;
    double gradient = 0.0;
    double h1 = 0.0;
};

struct ConvergenceReport {
    std::vector<MisfitRow> rows;
    double compact_needle_dist = 0.0;
    int burn_in = 1;  // first stage whose control set covers the compact
    bool monotone_after_burn_in = false;
};

// H1 misfit of v_n against G_k on a compact subset of the domain. Sample points
// come from one domain-wide lattice, so nested compacts share them. Throws
// SequenceError("compact_touches_needle") when dist(compact, needle) = 0.
ConvergenceReport convergence_report(const NeedleSequence& seq, const Scene& scene,
                                     const Shape& compact, double spacing = 0.01);
std::vector<ConvergenceReport> convergence_report(const NeedleSequence& seq, const Scene& scene,
                                                  const std::vector<Shape>& compacts,
                                                  double spacing = 0.01);

void save_sequence_csv(const NeedleSequence& seq, const std::string& path);
NeedleSequence load_sequence_csv(const std::string& path);

}  // namespace probe
