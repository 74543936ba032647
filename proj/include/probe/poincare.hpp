#pragma once

#include "probe/fem.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace probe {

class PoincareError : public std::runtime_error {
  public:
    PoincareError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

// spectral Poincare data for one scene: complement constant, per-obstacle
// constants, mesh volumes, and the largest wavenumber the energy bounds admit
struct ConstantsReport {
    double C0 = 0.0;                    // 1/sqrt(lambda_1), Dirichlet outer / Neumann interfaces
    std::vector<double> Cj;             // 1/sqrt(mu_1), first nonzero Neumann eigenvalue per obstacle
    std::vector<double> obstacle_volume;
    double complement_volume = 0.0;
    double k_max = 0.0;                 // min(1/C0, min_j 1/(sqrt8 Cj))
};

double mixed_poincare_constant(const Scene& scene, double h);
double neumann_poincare_constant(const Shape& shape, double h);
ConstantsReport poincare_constants(const Scene& scene, double h);

// squared mean-deviation constant over a positive-measure subset: C^2 (1 + sqrt(volU/volA))^2
double subset_mean_constant(double c, double vol_u, double vol_a);

struct SmallnessReport {
    bool complement_ok = false;  // k^2 C0^2 <= 1
    bool obstacle_ok = false;    // min_j {1 - 8 k^2 Cj^2} > 0
    double k_max = 0.0;
};
SmallnessReport smallness_check(const Scene& scene, const ConstantsReport& constants);

// one-scene energy bound audit: boundary pairing of the measured map difference
// against f versus the constant-weighted lower bound built from discrete fields
struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;        // lhs - rhs, nonnegative up to round-off when k admissible
    double identity_gap = 0.0;  // relative defect of the boundary/volume energy identity
    std::vector<double> subset_volume;  // |A_j| actually used
};

// f_ring: Dirichlet nodal data on the canonical outer ring of triangulate(scene, h).
// tube/tube_delta carve A_j = D_j minus a tube neighborhood of the needle; null tube
// keeps A_j = D_j.
InequalityReport basic_inequality_check(const Scene& scene, const ConstantsReport& constants,
                                        const CVec& f_ring, double h,
                                        const Needle* tube = nullptr, double tube_delta = 0.0);

// volume smallness guard in 2-D: pi > k^2 area(shape)
bool small_volume_condition(const Shape& shape, double k);

}  // namespace probe
