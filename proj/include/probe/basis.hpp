#pragma once

#include "probe/fem.hpp"
#include "probe/geometry.hpp"

#include <vector>

namespace probe {

struct ValueGrad {
    Complex value{0, 0};
    Complex dx{0, 0};
    Complex dy{0, 0};
};

class BasisError : public std::runtime_error {
  public:
    BasisError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

// G_k(y - x) with pole x: k=0 -> -(1/2pi) ln|y-x|; k>0 -> (i/4) H1_0(k|y-x|).
// Gradient taken in y. Throws BasisError("singular_point") at y=x.
ValueGrad fundamental_solution(double k, const Vec2& x, const Vec2& y);

// J_0..J_nmax at x >= 0 by downward recurrence (stable for all orders at once).
std::vector<double> bessel_j_array(double x, int nmax);

// Global solutions of the Helmholtz equation: circular waves J_|m|(kr) e^{im phi}
// for k>0 and harmonic powers (r/rho)^|m| e^{im phi} for k=0, m = -order..order,
// centered at a fixed point. Columns are rescaled so their sup over the disc of
// radius rho stays O(1); coefficients refer to the scaled functions.
class EntireBasis {
  public:
    EntireBasis(double k, int order, Vec2 center, double rho);

    int order() const { return order_; }
    int dim() const { return 2 * order_ + 1; }
    double k() const { return k_; }
    Vec2 center() const { return center_; }
    double rho() const { return rho_; }
    double scale(int m) const { return scale_[std::abs(m)]; }

    // fills value/dx/dy arrays of length dim(), index m + order
    void eval(const Vec2& y, Complex* value, Complex* dx, Complex* dy) const;
    ValueGrad combine(const CVec& coeffs, const Vec2& y) const;

  private:
    double k_;
    int order_;
    Vec2 center_;
    double rho_;
    std::vector<double> scale_;  // per |m|
};

}  // namespace probe
