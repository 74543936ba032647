#pragma once

#include "probe/blowup.hpp"
#include "probe/fem.hpp"
#include "probe/needle_sequence.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace probe {

class IndicatorError : public std::runtime_error {
  public:
    IndicatorError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

struct IndicatorRow {
    int n = 0;
    Complex value{0.0, 0.0};
};

// Boundary pairings of one needle sequence against a pair of measurement maps.
// classification bounded <=> the trace converges and the probe point lies outside.
struct IndicatorTrace {
    Vec2 probe;
    Needle needle;
    std::vector<IndicatorRow> values;
    double slope = 0.0;
    Growth classification = Growth::bounded;
    Complex limit{0.0, 0.0};  // last value; the limit estimate when bounded
};

// divergence call shared with the energy traces: ratio past burn-in plus slope sign.
// limit_bound_factor backs the stage-wise test with a cross-point one: limits more
// than this factor above a run's reference level are flagged even when each trace
// alone still looks bounded.
struct DivergenceRule {
    int burn_in = 3;
    double ratio_threshold = 10.0;
    double limit_bound_factor = 10.0;
};

// trace of stage n in the trace basis of the map (Fourier coefficients on a circle,
// nodal values for boundary hats)
CVec boundary_trace(const NeedleSequence& seq, int n, const DtNMatrix& dtn);

IndicatorTrace indicator_sequence(const NeedleSequence& seq, const DtNMatrix& lambda0,
                                  const DtNMatrix& lambda_d, const DivergenceRule& rule = {});

enum class PointClass { outside, inside_or_boundary };
const char* point_class_name(PointClass c);
PointClass classify_point(const IndicatorTrace& trace);

struct ProfileRow {
    double t = 0.0;
    Complex indicator{0.0, 0.0};
    double abs_last = 0.0;
    Growth classification = Growth::bounded;
};

// indicator values along one needle truncated at each grid parameter
struct IndicatorProfile {
    std::vector<ProfileRow> rows;
    // first grid parameter whose trace diverges or whose limit exceeds
    // limit_bound_factor times the first row's; 1 when none does
    double t_hat = 1.0;
};

// shorter ladder for per-parameter and per-grid-point fits
FitSchedule sweep_schedule();

IndicatorProfile indicator_profile(const Scene& scene, const Needle& needle,
                                   const DtNMatrix& lambda0, const DtNMatrix& lambda_d,
                                   const std::vector<double>& t_grid,
                                   const FitSchedule& schedule = sweep_schedule(),
                                   const DivergenceRule& rule = {});

// exact rotation of a fitted sequence about its basis center: rotating the control
// cloud and needle together rotates the least-squares solution, so mode m picks up
// the phase e^{-i m phi}
NeedleSequence rotate_sequence(const NeedleSequence& seq, double phi);

struct FieldPoint {
    Vec2 p;
    Growth classification = Growth::bounded;
    double abs_last = 0.0;
    bool deflected = false;
};

struct IndicatorField {
    std::vector<FieldPoint> points;
    double spacing = 0.0;
    std::vector<Vec2> estimated_region() const;  // points with divergent traces
};

struct ReconstructOptions {
    double spacing = 0.05;
    double margin = 0.15;  // grid kept this far inside the outer boundary
    FitSchedule schedule = sweep_schedule();
    DivergenceRule rule;
};

// Classifies a probe grid from the two measurement maps alone; obstacles in the
// scene are never consulted. Disc domains use polar rings so every needle is a
// rotation of one reference fit per radius; needles grazing previously flagged
// divergent points are deflected to a two-segment polyline and refit directly.
IndicatorField reconstruct(const Scene& scene, const DtNMatrix& lambda0,
                           const DtNMatrix& lambda_d, const ReconstructOptions& opts = {});

void save_field_csv(const IndicatorField& field, const std::string& path);
void save_field_svg(const IndicatorField& field, const Scene& scene, const std::string& path);

}  // namespace probe
