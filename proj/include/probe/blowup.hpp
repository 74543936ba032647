#pragma once

#include "probe/geometry.hpp"
#include "probe/needle_sequence.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace probe {

class BlowupError : public std::runtime_error {
  public:
    BlowupError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

enum class Growth { bounded, divergent };

const char* growth_name(Growth g);

struct EnergyRow {
    int n = 0;
    double energy = 0.0;
};

// Gradient energy of the fitted stages over one region, with the (ratio, slope)
// divergence call attached by classify_growth.
struct EnergyTrace {
    std::string region;
    std::vector<EnergyRow> values;
    double slope = 0.0;  // least-squares slope of log E_n vs n past burn-in
    Growth classification = Growth::bounded;
};

// integral of |grad v_n|^2 over (cone cap ball-of-height) intersect domain,
// midpoint rule with cell <= height/64; cells counted by center membership
double cone_energy(const NeedleSequence& seq, int n, const FiniteCone& cone, const Scene& scene);

// same integral over the open ball intersect domain, cell <= radius/64;
// an empty intersection gives 0
double ball_energy(const NeedleSequence& seq, int n, const Vec2& center, double radius,
                   const Scene& scene);

// divergent iff E_last >= ratio_threshold * E_burn_in and the fitted slope of
// log E vs n past burn-in is positive. Throws insufficient_data when the trace
// is shorter than burn_in + 3. Fills trace.slope and trace.classification.
Growth classify_growth(EnergyTrace& trace, int burn_in = 3, double ratio_threshold = 10.0);

EnergyTrace cone_trace(const NeedleSequence& seq, const FiniteCone& cone, const Scene& scene,
                       int burn_in = 3, double ratio_threshold = 10.0);
EnergyTrace ball_trace(const NeedleSequence& seq, const Vec2& center, double radius,
                       const Scene& scene, int burn_in = 3, double ratio_threshold = 10.0);

void save_energy_csv(const std::vector<EnergyTrace>& traces, const std::string& path);

}  // namespace probe
