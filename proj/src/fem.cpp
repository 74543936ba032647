#include "probe/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace probe {

namespace {

uint64_t splitmix(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_rand(uint64_t& s) { return 2.0 * (splitmix(s) >> 11) * 0x1.0p-53 - 1.0; }

}  // namespace

Assembly assemble_p1(const Mesh& mesh, const std::vector<double>& coeff_by_region) {
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(mesh.triangles.size() * 9);
    mt.reserve(mesh.triangles.size() * 9);
    for (size_t t = 0; t < mesh.triangles.size(); t++) {
        int region = mesh.tri_region[t];
        double coeff = region < (int)coeff_by_region.size() ? coeff_by_region[region] : 0.0;
        if (coeff == 0.0) continue;
        const auto& tr = mesh.triangles[t];
        const Vec2& p0 = mesh.nodes[tr[0]];
        const Vec2& p1 = mesh.nodes[tr[1]];
        const Vec2& p2 = mesh.nodes[tr[2]];
        double area = 0.5 * (p1 - p0).cross(p2 - p0);
        if (area <= 0) throw FemError("bad_mesh", "non-positive triangle area");
        double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) {
                double kij = coeff * (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                double mij = area / 12.0 * (i == j ? 2.0 : 1.0);
                kt.emplace_back(tr[i], tr[j], kij);
                mt.emplace_back(tr[i], tr[j], mij);
            }
    }
    int n = (int)mesh.nodes.size();
    Assembly a;
    a.stiffness.resize(n, n);
    a.mass.resize(n, n);
    a.stiffness.setFromTriplets(kt.begin(), kt.end());
    a.mass.setFromTriplets(mt.begin(), mt.end());
    return a;
}

CVec apply_real(const Eigen::SparseMatrix<double>& A, const CVec& x) {
    Eigen::VectorXd xr = x.real(), xi = x.imag();
    Eigen::VectorXd yr = A * xr, yi = A * xi;
    CVec y(A.rows());
    y.real() = yr;
    y.imag() = yi;
    return y;
}

BoundaryRing outer_ring(const Mesh& mesh, const Scene& scene) {
    BoundaryRing ring;
    std::vector<int> loop = mesh.outer_boundary_loop();
    if (loop.empty()) throw FemError("bad_mesh", "no outer boundary loop");
    size_t start = 0;
    for (size_t i = 1; i < loop.size(); i++) {
        const Vec2& p = mesh.nodes[loop[i]];
        const Vec2& q = mesh.nodes[loop[start]];
        if (p.x > q.x + 1e-15 || (std::abs(p.x - q.x) <= 1e-15 && p.y < q.y)) start = i;
    }
    std::rotate(loop.begin(), loop.begin() + start, loop.end());
    ring.nodes = loop;
    size_t n = loop.size();
    ring.pos.resize(n);
    for (size_t i = 0; i < n; i++) ring.pos[i] = mesh.nodes[loop[i]];
    ring.weight.assign(n, 0.0);
    for (size_t i = 0; i < n; i++) {
        double len = distance(ring.pos[i], ring.pos[(i + 1) % n]);
        ring.weight[i] += 0.5 * len;
        ring.weight[(i + 1) % n] += 0.5 * len;
    }
    if (const Disc* d = std::get_if<Disc>(&scene.outer)) {
        ring.is_circle = true;
        ring.R = d->radius;
        ring.center = d->center;
        ring.theta.resize(n);
        for (size_t i = 0; i < n; i++) {
            Vec2 v = ring.pos[i] - d->center;
            double th = std::atan2(v.y, v.x);
            ring.theta[i] = th < 0 ? th + 2 * M_PI : th;
        }
    }
    return ring;
}

DirichletSolver::DirichletSolver(const Mesh& mesh, const Scene& scene,
                                 std::vector<double> coeff_by_region, double k)
    : mesh_(&mesh), k_(k) {
    Assembly asmb = assemble_p1(mesh, coeff_by_region);
    A_ = asmb.stiffness - (k * k) * asmb.mass;
    ring_ = outer_ring(mesh, scene);
    int n = (int)mesh.nodes.size();
    ring_index_.assign(n, -1);
    for (size_t i = 0; i < ring_.nodes.size(); i++) ring_index_[ring_.nodes[i]] = (int)i;
    inner_index_.assign(n, -1);
    int ninner = 0;
    for (int i = 0; i < n; i++)
        if (ring_index_[i] < 0) inner_index_[i] = ninner++;
    std::vector<Eigen::Triplet<double>> aii, aib;
    std::vector<char> has_diag(ninner, 0);
    for (int col = 0; col < A_.outerSize(); col++)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_, col); it; ++it) {
            int i = (int)it.row(), j = (int)it.col();
            if (inner_index_[i] < 0) continue;
            if (inner_index_[j] >= 0) {
                aii.emplace_back(inner_index_[i], inner_index_[j], it.value());
                if (i == j && it.value() != 0.0) has_diag[inner_index_[i]] = 1;
            } else {
                aib.emplace_back(inner_index_[i], ring_index_[j], it.value());
            }
        }
    for (int i = 0; i < ninner; i++)
        if (!has_diag[i]) aii.emplace_back(i, i, 1.0);  // nodes outside the active region
    Eigen::SparseMatrix<double> AII(ninner, ninner);
    AII.setFromTriplets(aii.begin(), aii.end());
    AIB_.resize(ninner, (int)ring_.nodes.size());
    AIB_.setFromTriplets(aib.begin(), aib.end());
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(AII);
    if (lu_->info() != Eigen::Success)
        throw FemError("singular_system", "factorization failed; k^2 may hit an eigenvalue");
}

CVec DirichletSolver::solve(const CVec& g) const {
    if ((int)g.size() != (int)ring_.nodes.size())
        throw FemError("bad_data", "Dirichlet vector size does not match the boundary ring");
    CVec rhs = -apply_real(AIB_, g);
    Eigen::VectorXd ur = lu_->solve(rhs.real().eval());
    Eigen::VectorXd ui;
    if (rhs.size() > 0 && rhs.imag().cwiseAbs().maxCoeff() > 0)
        ui = lu_->solve(rhs.imag().eval());
    else
        ui = Eigen::VectorXd::Zero(rhs.size());
    if (lu_->info() != Eigen::Success) throw FemError("singular_system", "solve failed");
    CVec u = CVec::Zero(mesh_->nodes.size());
    for (size_t i = 0; i < mesh_->nodes.size(); i++) {
        if (inner_index_[i] >= 0)
            u[i] = Complex(ur[inner_index_[i]], ui[inner_index_[i]]);
        else
            u[i] = g[ring_index_[i]];
    }
    return u;
}

CVec DirichletSolver::weak_flux(const CVec& u_full) const {
    CVec w_all = apply_real(A_, u_full);
    CVec w(ring_.nodes.size());
    for (size_t i = 0; i < ring_.nodes.size(); i++) w[i] = w_all[ring_.nodes[i]];
    return w;
}

Complex DirichletSolver::energy_form(const CVec& a, const CVec& b) const {
    CVec t = apply_real(A_, b);
    return (a.transpose() * t).value();
}

namespace {

Eigen::MatrixXd boundary_mass(const BoundaryRing& ring) {
    int n = (int)ring.nodes.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; i++) {
        int j = (i + 1) % n;
        double len = distance(ring.pos[i], ring.pos[j]);
        B(i, i) += len / 3.0;
        B(j, j) += len / 3.0;
        B(i, j) += len / 6.0;
        B(j, i) += len / 6.0;
    }
    return B;
}

std::vector<double> region_ones(const Scene& scene) {
    return std::vector<double>(scene.obstacles.size() + 1, 1.0);
}

}  // namespace

DtNMatrix dtn_map_on(const Mesh& full_mesh, const Scene& scene, bool with_obstacle, int n_modes) {
    DtNMatrix dtn;
    dtn.k = scene.k;
    dtn.h = full_mesh.h;
    Mesh restricted;
    const Mesh* mesh = &full_mesh;
    std::vector<double> coeff = region_ones(scene);
    if (with_obstacle && !scene.obstacles.empty()) {
        restricted = restrict_to_complement(full_mesh);
        mesh = &restricted;
        coeff = {1.0};
    }
    DirichletSolver solver(*mesh, scene, coeff, scene.k);
    const BoundaryRing& ring = solver.ring();
    int nb = (int)ring.nodes.size();
    if (ring.is_circle) {
        if (2 * n_modes + 1 > nb / 2)
            throw FemError("invalid_modes", "mode count exceeds boundary resolution");
        dtn.kind = TraceBasisKind::trig_modes;
        dtn.n_modes = n_modes;
        dtn.R = ring.R;
        dtn.center = ring.center;
        int dim = 2 * n_modes + 1;
        dtn.lambda = CMat::Zero(dim, dim);
        for (int m = 0; m <= n_modes; m++) {
            CVec g(nb);
            for (int i = 0; i < nb; i++) g[i] = std::polar(1.0, m * ring.theta[i]);
            CVec u = solver.solve(g);
            CVec w = solver.weak_flux(u);
            for (int l = -n_modes; l <= n_modes; l++) {
                Complex t = 0;
                for (int i = 0; i < nb; i++) t += w[i] * std::polar(1.0, -l * ring.theta[i]);
                t /= 2 * M_PI * ring.R;
                dtn.lambda(l + n_modes, m + n_modes) = t;
                if (m > 0) dtn.lambda(-l + n_modes, -m + n_modes) = std::conj(t);
            }
        }
        dtn.gram = Eigen::MatrixXd::Zero(dim, dim);
        for (int l = -n_modes; l <= n_modes; l++) dtn.gram(l + n_modes, -l + n_modes) = 2 * M_PI * ring.R;
    } else {
        dtn.kind = TraceBasisKind::boundary_hats;
        dtn.nodes = ring.pos;
        dtn.gram = boundary_mass(ring);
        CMat W(nb, nb);
        for (int j = 0; j < nb; j++) {
            CVec g = CVec::Zero(nb);
            g[j] = 1.0;
            W.col(j) = solver.weak_flux(solver.solve(g));
        }
        dtn.flux = W;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(dtn.gram);
        CMat lam(nb, nb);
        Eigen::MatrixXd wr = W.real(), wi = W.imag();
        Eigen::MatrixXd lr = ldlt.solve(wr), li = ldlt.solve(wi);
        lam.real() = lr;
        lam.imag() = li;
        dtn.lambda = lam;
    }
    return dtn;
}

DtNMatrix dtn_map(const Scene& scene, bool with_obstacle, int n_modes, double h) {
    Mesh full = triangulate(scene, h);
    return dtn_map_on(full, scene, with_obstacle, n_modes);
}

std::vector<double> dtn_annulus_analytic(double R, double eps, int n_modes) {
    if (!(R > 0) || eps < 0 || eps >= R) throw FemError("bad_data", "need 0 <= eps < R");
    std::vector<double> out;
    double rho = eps / R;
    for (int n = 0; n <= n_modes; n++) {
        if (n == 0) {
            out.push_back(0.0);
            continue;
        }
        double r2n = std::pow(rho, 2 * n);
        out.push_back((n / R) * (1.0 - r2n) / (1.0 + r2n));
    }
    return out;
}

DtNMatrix dtn_difference(const DtNMatrix& a, const DtNMatrix& b) {
    if (a.kind != b.kind || a.dim() != b.dim())
        throw FemError("bad_data", "DtN maps use different trace bases");
    if (a.kind == TraceBasisKind::trig_modes) {
        if (a.n_modes != b.n_modes || std::abs(a.R - b.R) > 1e-12 ||
            distance(a.center, b.center) > 1e-12)
            throw FemError("bad_data", "DtN maps live on different circles");
    } else {
        for (size_t i = 0; i < a.nodes.size(); i++)
            if (distance(a.nodes[i], b.nodes[i]) > 1e-12)
                throw FemError("bad_data", "DtN maps use different boundary nodes");
    }
    DtNMatrix d = a;
    d.lambda = a.lambda - b.lambda;
    if (a.flux.size() > 0 && b.flux.size() > 0) d.flux = a.flux - b.flux;
    return d;
}

namespace {
Complex pairing_core(const DtNMatrix& dtn, const CVec& d, const CVec& c) {
    CVec t = dtn.lambda * d;
    CVec gc = dtn.gram.cast<Complex>() * c;
    return (t.transpose() * gc).value();
}
}  // namespace

Complex dtn_pairing_sesquilinear(const DtNMatrix& dtn, const CVec& f) {
    CVec d(f.size());
    if (dtn.kind == TraceBasisKind::trig_modes) {
        int n = dtn.n_modes;
        for (int l = -n; l <= n; l++) d[l + n] = std::conj(f[-l + n]);
    } else {
        d = f.conjugate();
    }
    return pairing_core(dtn, d, f);
}

Complex dtn_pairing_bilinear(const DtNMatrix& dtn, const CVec& f) {
    return pairing_core(dtn, f, f);
}

void save_dtn(const DtNMatrix& dtn, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw FemError("io_error", "cannot write " + path);
    std::fprintf(fp, "dtn %d %d %.17g %.17g %.17g %.17g %.17g %d\n",
                 dtn.kind == TraceBasisKind::trig_modes ? 0 : 1, dtn.n_modes, dtn.R, dtn.center.x,
                 dtn.center.y, dtn.k, dtn.h, dtn.dim());
    std::fprintf(fp, "%zu\n", dtn.nodes.size());
    for (const Vec2& p : dtn.nodes) std::fprintf(fp, "%.17g %.17g\n", p.x, p.y);
    int dim = dtn.dim();
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++)
            std::fprintf(fp, "%.17g %.17g\n", dtn.lambda(i, j).real(), dtn.lambda(i, j).imag());
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++) std::fprintf(fp, "%.17g\n", dtn.gram(i, j));
    std::fprintf(fp, "%d\n", dtn.flux.size() > 0 ? 1 : 0);
    if (dtn.flux.size() > 0)
        for (int i = 0; i < dim; i++)
            for (int j = 0; j < dim; j++)
                std::fprintf(fp, "%.17g %.17g\n", dtn.flux(i, j).real(), dtn.flux(i, j).imag());
    std::fclose(fp);
}

DtNMatrix load_dtn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FemError("io_error", "cannot read " + path);
    std::string tag;
    int kind, dim;
    DtNMatrix dtn;
    in >> tag >> kind >> dtn.n_modes >> dtn.R >> dtn.center.x >> dtn.center.y >> dtn.k >> dtn.h >>
        dim;
    if (tag != "dtn" || !in) throw FemError("io_error", "not a DtN file: " + path);
    dtn.kind = kind == 0 ? TraceBasisKind::trig_modes : TraceBasisKind::boundary_hats;
    size_t nn;
    in >> nn;
    dtn.nodes.resize(nn);
    for (Vec2& p : dtn.nodes) in >> p.x >> p.y;
    dtn.lambda.resize(dim, dim);
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++) {
            double re, im;
            in >> re >> im;
            dtn.lambda(i, j) = Complex(re, im);
        }
    dtn.gram.resize(dim, dim);
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++) in >> dtn.gram(i, j);
    int has_flux;
    in >> has_flux;
    if (has_flux) {
        dtn.flux.resize(dim, dim);
        for (int i = 0; i < dim; i++)
            for (int j = 0; j < dim; j++) {
                double re, im;
                in >> re >> im;
                dtn.flux(i, j) = Complex(re, im);
            }
    }
    if (!in) throw FemError("io_error", "truncated DtN file: " + path);
    return dtn;
}

EnergyIdentity energy_identity_residual(const Scene& scene, const CVec& f_ring, double h) {
    Mesh full = triangulate(scene, h);
    DirichletSolver bg(full, scene, region_ones(scene), scene.k);
    Mesh restricted = restrict_to_complement(full);
    DirichletSolver mixed(restricted, scene, {1.0}, scene.k);
    if ((int)bg.ring().nodes.size() != (int)f_ring.size() ||
        mixed.ring().nodes.size() != bg.ring().nodes.size())
        throw FemError("bad_data", "boundary data size does not match the mesh ring");

    CVec v = bg.solve(f_ring);
    CVec u = mixed.solve(f_ring);
    CVec w0 = bg.weak_flux(v), wD = mixed.weak_flux(u);
    Complex lhs = 0;
    for (int i = 0; i < f_ring.size(); i++) lhs += std::conj(w0[i] - wD[i]) * f_ring[i];

    CVec d(restricted.nodes.size());
    for (size_t i = 0; i < restricted.nodes.size(); i++)
        d[i] = u[i] - v[restricted.parent_node.empty() ? i : restricted.parent_node[i]];
    Complex rhs = mixed.energy_form(d.conjugate(), d);
    if (!scene.obstacles.empty()) {
        std::vector<double> sel(scene.obstacles.size() + 1, 1.0);
        sel[0] = 0.0;
        Assembly inside = assemble_p1(full, sel);
        CVec t = apply_real(inside.stiffness, v) - scene.k * scene.k * apply_real(inside.mass, v);
        rhs += (v.conjugate().transpose() * t).value();
    }
    EnergyIdentity out;
    out.lhs = lhs;
    out.rhs = rhs;
    out.residual = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    return out;
}

std::vector<double> generalized_eigs_near(const Eigen::SparseMatrix<double>& K,
                                          const Eigen::SparseMatrix<double>& M,
                                          const std::vector<int>& free_dofs, double shift,
                                          int count, const Eigen::VectorXd* deflate) {
    int nf = (int)free_dofs.size();
    if (nf == 0) throw FemError("bad_data", "no free dofs");
    std::vector<int> idx(K.rows(), -1);
    for (int i = 0; i < nf; i++) idx[free_dofs[i]] = i;
    auto restrict_mat = [&](const Eigen::SparseMatrix<double>& A) {
        std::vector<Eigen::Triplet<double>> tr;
        for (int col = 0; col < A.outerSize(); col++)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
                if (idx[it.row()] >= 0 && idx[it.col()] >= 0)
                    tr.emplace_back(idx[it.row()], idx[it.col()], it.value());
        Eigen::SparseMatrix<double> R(nf, nf);
        R.setFromTriplets(tr.begin(), tr.end());
        return R;
    };
    Eigen::SparseMatrix<double> Kf = restrict_mat(K), Mf = restrict_mat(M);

    Eigen::VectorXd defl;
    if (deflate) {
        defl.resize(nf);
        for (int i = 0; i < nf; i++) defl[i] = (*deflate)[free_dofs[i]];
        double nrm = std::sqrt(defl.dot(Mf * defl));
        if (nrm > 0) defl /= nrm;
    }
    auto project = [&](Eigen::VectorXd& x) {
        if (defl.size()) x -= defl * (defl.dot(Mf * x));
    };

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double s = shift;
    for (int attempt = 0;; attempt++) {
        Eigen::SparseMatrix<double> A = Kf - s * Mf;
        A.makeCompressed();
        lu.compute(A);
        if (lu.info() == Eigen::Success) break;
        if (attempt >= 3) throw FemError("singular_system", "eigen shift factorization failed");
        s = s * (1.0 + 1e-7) + 1e-9;
    }

    int q = std::min(count + 8, nf);
    Eigen::MatrixXd X(nf, q);
    uint64_t seed = 0x5eedULL;
    for (int j = 0; j < q; j++)
        for (int i = 0; i < nf; i++) X(i, j) = unit_rand(seed);

    Eigen::VectorXd prev;
    for (int iter = 0; iter < 60; iter++) {
        Eigen::MatrixXd Y(nf, q);
        for (int j = 0; j < q; j++) {
            Eigen::VectorXd y = lu.solve((Mf * X.col(j)).eval());
            project(y);
            Y.col(j) = y;
        }
        // M-orthonormalize
        for (int j = 0; j < q; j++) {
            for (int i = 0; i < j; i++) Y.col(j) -= Y.col(i) * (Y.col(i).dot(Mf * Y.col(j)));
            double nrm = std::sqrt(Y.col(j).dot(Mf * Y.col(j)));
            if (nrm < 1e-300) {
                Eigen::VectorXd fresh(nf);
                for (int i = 0; i < nf; i++) fresh[i] = unit_rand(seed);
                project(fresh);
                Y.col(j) = fresh;
                nrm = std::sqrt(Y.col(j).dot(Mf * Y.col(j)));
            }
            Y.col(j) /= nrm;
        }
        X = Y;
        if (iter % 5 == 4 || iter == 59) {
            Eigen::MatrixXd Ar = X.transpose() * (Kf * X);
            Eigen::MatrixXd Br = X.transpose() * (Mf * X);
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar, Br);
            Eigen::VectorXd theta = es.eigenvalues();
            if (prev.size() == theta.size() &&
                (theta - prev).cwiseAbs().maxCoeff() <
                    1e-11 * (1.0 + theta.cwiseAbs().maxCoeff()))
                break;
            prev = theta;
        }
    }
    Eigen::MatrixXd Ar = X.transpose() * (Kf * X);
    Eigen::MatrixXd Br = X.transpose() * (Mf * X);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar, Br);
    std::vector<double> eigs(es.eigenvalues().data(), es.eigenvalues().data() + q);
    std::sort(eigs.begin(), eigs.end(),
              [&](double a, double b) { return std::abs(a - shift) < std::abs(b - shift); });
    if ((int)eigs.size() > count) eigs.resize(count);
    return eigs;
}

AdmissibilityReport check_admissibility(const Scene& scene, double h) {
    AdmissibilityReport rep;
    double k2 = scene.k * scene.k;

    Mesh full = triangulate(scene, h);
    Assembly a = assemble_p1(full, region_ones(scene));
    BoundaryRing ring = outer_ring(full, scene);
    std::vector<char> on_ring(full.nodes.size(), 0);
    for (int i : ring.nodes) on_ring[i] = 1;
    std::vector<int> free;
    for (size_t i = 0; i < full.nodes.size(); i++)
        if (!on_ring[i]) free.push_back((int)i);
    rep.nearest_dirichlet = generalized_eigs_near(a.stiffness, a.mass, free, k2, 1).front();
    rep.dirichlet_gap_rel = std::abs(rep.nearest_dirichlet - k2) / rep.nearest_dirichlet;

    if (scene.obstacles.empty()) {
        rep.nearest_mixed = rep.nearest_dirichlet;
        rep.mixed_gap_rel = rep.dirichlet_gap_rel;
    } else {
        Mesh restricted = restrict_to_complement(full);
        Assembly am = assemble_p1(restricted, {1.0});
        BoundaryRing mring = outer_ring(restricted, scene);
        std::vector<char> onr(restricted.nodes.size(), 0);
        for (int i : mring.nodes) onr[i] = 1;
        std::vector<int> mfree;
        for (size_t i = 0; i < restricted.nodes.size(); i++)
            if (!onr[i]) mfree.push_back((int)i);
        rep.nearest_mixed = generalized_eigs_near(am.stiffness, am.mass, mfree, k2, 1).front();
        rep.mixed_gap_rel = std::abs(rep.nearest_mixed - k2) / rep.nearest_mixed;
    }
    rep.admissible = rep.dirichlet_gap_rel >= 1e-3 && rep.mixed_gap_rel >= 1e-3;
    return rep;
}

}  // namespace probe
