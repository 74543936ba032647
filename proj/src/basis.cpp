#include "probe/basis.hpp"

#include <cmath>
#include <numbers>

namespace probe {

namespace {
constexpr double kPi = std::numbers::pi;
}

ValueGrad fundamental_solution(double k, const Vec2& x, const Vec2& y) {
    const Vec2 d = y - x;
    const double r = d.norm();
    if (r < 1e-14)
        throw BasisError("singular_point", "fundamental solution evaluated at its pole");
    ValueGrad out;
    if (k == 0.0) {
        out.value = Complex(-std::log(r) / (2.0 * kPi), 0.0);
        const double c = -1.0 / (2.0 * kPi * r * r);
        out.dx = Complex(c * d.x, 0.0);
        out.dy = Complex(c * d.y, 0.0);
    } else {
        const double t = k * r;
        const Complex i4(0.0, 0.25);
        const Complex h0(std::cyl_bessel_j(0, t), std::cyl_neumann(0, t));
        const Complex h1(std::cyl_bessel_j(1, t), std::cyl_neumann(1, t));
        out.value = i4 * h0;
        const Complex radial = -i4 * k * h1;
        out.dx = radial * (d.x / r);
        out.dy = radial * (d.y / r);
    }
    return out;
}

std::vector<double> bessel_j_array(double x, int nmax) {
    if (x < 0.0 || nmax < 0) throw BasisError("bad_data", "bessel_j_array needs x >= 0, nmax >= 0");
    std::vector<double> out(std::size_t(nmax) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int base = std::max(nmax, int(x)) + 1;
    int start = base + int(std::sqrt(40.0 * base)) + 14;
    if (start % 2) ++start;
    double sum = 0.0;
    double jnp1 = 0.0;
    double jn = 1e-300;
    for (int n = start; n >= 1; --n) {
        const double jnm1 = (2.0 * n / x) * jn - jnp1;
        jnp1 = jn;
        jn = jnm1;
        if (std::abs(jn) > 1e250) {
            const double s = 1e-250;
            jn *= s;
            jnp1 *= s;
            sum *= s;
            for (double& v : out) v *= s;
        }
        const int ord = n - 1;
        if (ord <= nmax) out[std::size_t(ord)] = jn;
        if (ord > 0 && ord % 2 == 0) sum += 2.0 * jn;
    }
    sum += jn;
    for (double& v : out) v /= sum;
    return out;
}

EntireBasis::EntireBasis(double k, int order, Vec2 center, double rho)
    : k_(k), order_(order), center_(center), rho_(rho) {
    if (order < 0) throw BasisError("bad_basis", "negative basis order");
    if (!(rho > 0.0)) throw BasisError("bad_basis", "basis needs a positive reference radius");
    if (k < 0.0) throw BasisError("bad_basis", "negative wavenumber");
    scale_.assign(std::size_t(order) + 1, 1.0);
    if (k == 0.0) {
        double s = 1.0;
        for (int m = 0; m <= order; ++m) {
            scale_[std::size_t(m)] = s;
            s *= rho;
        }
    } else {
        const int ns = 400;
        std::vector<double> peak(std::size_t(order) + 1, 0.0);
        for (int i = 0; i <= ns; ++i) {
            const double t = k * rho * double(i) / ns;
            const auto J = bessel_j_array(t, order);
            for (int m = 0; m <= order; ++m)
                peak[std::size_t(m)] = std::max(peak[std::size_t(m)], std::abs(J[std::size_t(m)]));
        }
        for (int m = 0; m <= order; ++m)
            scale_[std::size_t(m)] = std::max(peak[std::size_t(m)], 1e-290);
    }
}

void EntireBasis::eval(const Vec2& y, Complex* value, Complex* dx, Complex* dy) const {
    const Vec2 d = y - center_;
    const int N = order_;
    if (k_ == 0.0) {
        const Complex z(d.x, d.y);
        const Complex i1(0.0, 1.0);
        value[N] = Complex(1.0, 0.0);
        dx[N] = dy[N] = Complex(0.0, 0.0);
        Complex zm(1.0, 0.0);
        for (int m = 1; m <= N; ++m) {
            const Complex zm1 = zm;
            zm *= z;
            const double s = scale_[std::size_t(m)];
            const Complex g = double(m) * zm1 / s;
            value[N + m] = zm / s;
            dx[N + m] = g;
            dy[N + m] = i1 * g;
            value[N - m] = std::conj(zm) / s;
            dx[N - m] = std::conj(g);
            dy[N - m] = -i1 * std::conj(g);
        }
        return;
    }
    const double r = d.norm();
    const double t = k_ * r;
    const auto J = bessel_j_array(t, N + 1);
    const Complex eiphi = (r > 1e-300) ? Complex(d.x / r, d.y / r) : Complex(1.0, 0.0);
    // raw waves W_m = J_m(kr) e^{im phi}, m = -(N+1)..N+1, with J_{-m} = (-1)^m J_m
    std::vector<Complex> W(std::size_t(2 * N) + 3);
    const int off = N + 1;
    Complex em(1.0, 0.0);
    for (int m = 0; m <= N + 1; ++m) {
        const Complex wm = J[std::size_t(m)] * em;
        W[std::size_t(off + m)] = wm;
        W[std::size_t(off - m)] = (m % 2 == 0) ? std::conj(wm) : -std::conj(wm);
        em *= eiphi;
    }
    const Complex ik2(0.0, 0.5 * k_);
    for (int m = -N; m <= N; ++m) {
        const double s = scale_[std::size_t(std::abs(m))];
        const Complex wm1 = W[std::size_t(off + m - 1)];
        const Complex wp1 = W[std::size_t(off + m + 1)];
        value[N + m] = W[std::size_t(off + m)] / s;
        dx[N + m] = 0.5 * k_ * (wm1 - wp1) / s;
        dy[N + m] = ik2 * (wp1 + wm1) / s;
    }
}

ValueGrad EntireBasis::combine(const CVec& coeffs, const Vec2& y) const {
    if (coeffs.size() != dim())
        throw BasisError("bad_data", "coefficient vector does not match basis dimension");
    const auto n = static_cast<std::size_t>(dim());
    std::vector<Complex> v(n), gx(n), gy(n);
    eval(y, v.data(), gx.data(), gy.data());
    ValueGrad out;
    for (int j = 0; j < dim(); ++j) {
        out.value += coeffs[j] * v[std::size_t(j)];
        out.dx += coeffs[j] * gx[std::size_t(j)];
        out.dy += coeffs[j] * gy[std::size_t(j)];
    }
    return out;
}

}  // namespace probe
