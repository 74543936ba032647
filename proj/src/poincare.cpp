#include "probe/poincare.hpp"

#include <algorithm>
#include <cmath>

namespace probe {

namespace {

std::vector<double> region_ones(const Scene& scene) {
    return std::vector<double>(scene.obstacles.size() + 1, 1.0);
}

std::vector<int> non_ring_dofs(const Mesh& mesh, const BoundaryRing& ring) {
    std::vector<char> on_ring(mesh.nodes.size(), 0);
    for (int i : ring.nodes) on_ring[std::size_t(i)] = 1;
    std::vector<int> free;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (!on_ring[i]) free.push_back(int(i));
    return free;
}

double smallest_eig(const Eigen::SparseMatrix<double>& K, const Eigen::SparseMatrix<double>& M,
                    const std::vector<int>& free, double shift, const Eigen::VectorXd* deflate) {
    double lambda = 0.0;
    try {
        lambda = generalized_eigs_near(K, M, free, shift, 1, deflate).front();
    } catch (const FemError& e) {
        throw PoincareError("eigensolver_failure", e.what());
    }
    if (!(lambda > 0.0))
        throw PoincareError("eigensolver_failure", "nonpositive leading eigenvalue");
    return lambda;
}

}  // namespace

double mixed_poincare_constant(const Scene& scene, double h) {
    const Mesh full = triangulate(scene, h);
    const Mesh dom = scene.obstacles.empty() ? full : restrict_to_complement(full);
    const Assembly a = assemble_p1(dom, {1.0});
    const BoundaryRing ring = outer_ring(dom, scene);
    const double lambda1 = smallest_eig(a.stiffness, a.mass, non_ring_dofs(dom, ring), 0.0, nullptr);
    return 1.0 / std::sqrt(lambda1);
}

double neumann_poincare_constant(const Shape& shape, double h) {
    Scene cell;
    cell.outer = shape;
    cell.k = 0.0;
    const Mesh mesh = triangulate(cell, h);
    const Assembly a = assemble_p1(mesh, {1.0});
    std::vector<int> all(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) all[i] = int(i);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(Eigen::Index(mesh.nodes.size()));
    // negative shift keeps the factorization away from the deflated constant mode
    Vec2 lo, hi;
    shape_bbox(shape, lo, hi);
    const double diam = std::max(hi.x - lo.x, hi.y - lo.y);
    const double mu1 = smallest_eig(a.stiffness, a.mass, all, -1.0 / (diam * diam), &ones);
    return 1.0 / std::sqrt(mu1);
}

ConstantsReport poincare_constants(const Scene& scene, double h) {
    ConstantsReport rep;
    rep.C0 = mixed_poincare_constant(scene, h);
    const Mesh full = triangulate(scene, h);
    double vol_d = 0.0;
    for (std::size_t j = 0; j < scene.obstacles.size(); ++j) {
        // h is relative to the scene scale; keep obstacle meshes at matching resolution
        rep.Cj.push_back(neumann_poincare_constant(scene.obstacles[j], h));
        double vol = 0.0;
        for (std::size_t t = 0; t < full.triangles.size(); ++t)
            if (full.tri_region[t] == int(j) + 1) vol += full.triangle_area(int(t));
        rep.obstacle_volume.push_back(vol);
        vol_d += vol;
    }
    rep.complement_volume = full.area() - vol_d;
    rep.k_max = 1.0 / rep.C0;
    for (const double cj : rep.Cj)
        rep.k_max = std::min(rep.k_max, 1.0 / (std::sqrt(8.0) * cj));
    return rep;
}

double subset_mean_constant(double c, double vol_u, double vol_a) {
    if (!(vol_a > 0.0) || vol_a > vol_u * (1.0 + 1e-12))
        throw PoincareError("bad_data", "subset volume must lie in ]0, volU]");
    const double f = 1.0 + std::sqrt(vol_u / vol_a);
    return c * c * f * f;
}

SmallnessReport smallness_check(const Scene& scene, const ConstantsReport& constants) {
    SmallnessReport rep;
    const double k2 = scene.k * scene.k;
    rep.complement_ok = k2 * constants.C0 * constants.C0 <= 1.0;
    rep.obstacle_ok = true;
    for (const double cj : constants.Cj)
        rep.obstacle_ok = rep.obstacle_ok && 1.0 - 8.0 * k2 * cj * cj > 0.0;
    rep.k_max = constants.k_max;
    return rep;
}

namespace {

// real quadratic form x^H A x of a real sparse matrix
double quad(const Eigen::SparseMatrix<double>& A, const CVec& x) {
    return x.dot(apply_real(A, x)).real();
}

}  // namespace

InequalityReport basic_inequality_check(const Scene& scene, const ConstantsReport& constants,
                                        const CVec& f_ring, double h, const Needle* tube,
                                        double tube_delta) {
    const SmallnessReport sm = smallness_check(scene, constants);
    if (!sm.complement_ok || !sm.obstacle_ok)
        throw PoincareError("smallness_violated", "wavenumber exceeds the admissible range");

    const Mesh full = triangulate(scene, h);
    const bool empty_d = scene.obstacles.empty();
    const Mesh comp = empty_d ? full : restrict_to_complement(full);
    const DirichletSolver bg(full, scene, region_ones(scene), scene.k);
    const DirichletSolver cav(comp, scene, {1.0}, scene.k);
    if (f_ring.size() != Eigen::Index(bg.ring().nodes.size()))
        throw PoincareError("bad_data", "boundary data size does not match the outer ring");

    const CVec v = bg.solve(f_ring.conjugate());
    const CVec u = cav.solve(f_ring.conjugate());
    const CVec flux0 = bg.weak_flux(v);
    const CVec fluxd = cav.weak_flux(u);
    Complex lhs{0.0, 0.0};
    for (Eigen::Index i = 0; i < f_ring.size(); ++i) lhs += (flux0(i) - fluxd(i)) * f_ring(i);

    // complement gradient/mass energies of w = u - v
    CVec w = u;
    if (empty_d) {
        w -= v;
    } else {
        for (std::size_t i = 0; i < comp.nodes.size(); ++i)
            w(Eigen::Index(i)) -= v(Eigen::Index(comp.parent_node[i]));
    }
    const Assembly ac = assemble_p1(comp, {1.0});
    const double grad_w = quad(ac.stiffness, w);
    const double mass_w = quad(ac.mass, w);

    const double k2 = scene.k * scene.k;
    InequalityReport rep;
    double rhs = (1.0 - k2 * constants.C0 * constants.C0) * grad_w;
    double identity = grad_w - k2 * mass_w;

    double vol_d = 0.0;
    double mean_term = 0.0;
    for (std::size_t j = 0; j < scene.obstacles.size(); ++j) {
        std::vector<double> onehot(scene.obstacles.size() + 1, 0.0);
        onehot[j + 1] = 1.0;
        const Assembly aj = assemble_p1(full, onehot);
        const double grad_vj = quad(aj.stiffness, v);
        const double mass_vj = quad(aj.mass, v);
        identity += grad_vj - k2 * mass_vj;

        double vol_dj = 0.0, vol_a = 0.0;
        Complex int_v{0.0, 0.0};
        for (std::size_t t = 0; t < full.triangles.size(); ++t) {
            if (full.tri_region[t] != int(j) + 1) continue;
            const auto& tri = full.triangles[t];
            const double area = full.triangle_area(int(t));
            vol_dj += area;
            const Vec2 centroid =
                (1.0 / 3.0) * (full.nodes[std::size_t(tri[0])] + full.nodes[std::size_t(tri[1])] +
                               full.nodes[std::size_t(tri[2])]);
            if (tube && tube->distance(centroid) < tube_delta) continue;
            vol_a += area;
            int_v += area / 3.0 * (v(tri[0]) + v(tri[1]) + v(tri[2]));
        }
        if (!(vol_a > 0.0))
            throw PoincareError("bad_data", "tube exclusion removed an obstacle entirely");
        rep.subset_volume.push_back(vol_a);
        vol_d += vol_dj;
        rhs += (1.0 - 2.0 * k2 * subset_mean_constant(constants.Cj[j], vol_dj, vol_a)) * grad_vj;
        mean_term += std::norm(int_v / vol_a);
    }
    rhs -= 2.0 * k2 * vol_d * mean_term;

    rep.lhs = lhs.real();
    rep.rhs = rhs;
    rep.margin = rep.lhs - rep.rhs;
    rep.identity_gap = std::abs(lhs.real() - identity) / (1.0 + std::abs(lhs.real()));
    return rep;
}

bool small_volume_condition(const Shape& shape, double k) {
    return M_PI > k * k * shape_area(shape);
}

}  // namespace probe
