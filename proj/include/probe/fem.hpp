#pragma once

#include "probe/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <string>

namespace probe {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

class FemError : public std::runtime_error {
  public:
    FemError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

// P1 matrices. coeff_by_region[r] weights the stiffness of triangles in region r;
// a zero coefficient excludes the region from both matrices.
struct Assembly {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> mass;
};
Assembly assemble_p1(const Mesh& mesh, const std::vector<double>& coeff_by_region);

// y = A x for real sparse A and complex x
CVec apply_real(const Eigen::SparseMatrix<double>& A, const CVec& x);

// Outer boundary nodes in canonical CCW order (starts at the point with maximal x,
// ties broken by minimal y). theta is set when the outer shape is a disc.
struct BoundaryRing {
    std::vector<int> nodes;
    std::vector<double> theta;
    std::vector<double> weight;  // trapezoid arclength weight per node
    bool is_circle = false;
    double R = 1.0;
    Vec2 center{0, 0};
    std::vector<Vec2> pos;
};
BoundaryRing outer_ring(const Mesh& mesh, const Scene& scene);

// Solves (div coeff grad + k^2) u = 0 with Dirichlet data on the outer boundary and
// natural (Neumann/transmission) conditions everywhere else. One factorization,
// many right-hand sides. The mesh must outlive the solver.
class DirichletSolver {
  public:
    DirichletSolver(const Mesh& mesh, const Scene& scene, std::vector<double> coeff_by_region,
                    double k);

    const BoundaryRing& ring() const { return ring_; }
    const Mesh& mesh() const { return *mesh_; }

    // g holds Dirichlet values per ring node; returns the full nodal field
    CVec solve(const CVec& g) const;
    // weak Neumann data per ring node: i -> boundary integral of (d u / d nu) hat_i
    CVec weak_flux(const CVec& u_full) const;
    // integral of coeff grad(a).grad(b) - k^2 a b over the solver's region (no conjugation)
    Complex energy_form(const CVec& a, const CVec& b) const;

  private:
    const Mesh* mesh_;
    BoundaryRing ring_;
    double k_;
    Eigen::SparseMatrix<double> A_;     // stiffness - k^2 mass, all nodes
    Eigen::SparseMatrix<double> AIB_;   // interior-to-boundary coupling block
    std::vector<int> inner_index_;      // node -> interior unknown id or -1
    std::vector<int> ring_index_;       // node -> ring position or -1
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

// Discrete Dirichlet-to-Neumann map on the outer boundary.
enum class TraceBasisKind { trig_modes, boundary_hats };

struct DtNMatrix {
    TraceBasisKind kind = TraceBasisKind::trig_modes;
    int n_modes = 0;            // trig: modes m = -n_modes..n_modes
    double R = 1.0;             // trig: boundary circle radius
    Vec2 center{0, 0};          // trig: boundary circle center
    std::vector<Vec2> nodes;    // hats: ring node positions in canonical order
    CMat lambda;                // Dirichlet coefficients -> Neumann trace coefficients
    CMat flux;                  // hats: weak-flux matrix (gram * lambda); empty for trig
    Eigen::MatrixXd gram;       // realizes the boundary pairing without conjugation
    double k = 0.0;
    double h = 0.0;

    int dim() const { return (int)lambda.rows(); }
};

// with_obstacle=false ignores the obstacles (background medium); both variants use
// the same full-domain triangulation so they share boundary nodes exactly.
DtNMatrix dtn_map(const Scene& scene, bool with_obstacle, int n_modes, double h);
DtNMatrix dtn_map_on(const Mesh& full_mesh, const Scene& scene, bool with_obstacle, int n_modes);

// k=0 concentric-disc eigenvalues lambda_n, n = 0..n_modes; eps=0 gives the
// background map n/R.
std::vector<double> dtn_annulus_analytic(double R, double eps, int n_modes);

// entrywise difference; bases must match
DtNMatrix dtn_difference(const DtNMatrix& a, const DtNMatrix& b);

// boundary integral of (Lambda conj(f)) f, with f given by coefficients in the map's basis
Complex dtn_pairing_sesquilinear(const DtNMatrix& dtn, const CVec& f);
// boundary integral of (Lambda f) f (no conjugation anywhere)
Complex dtn_pairing_bilinear(const DtNMatrix& dtn, const CVec& f);

void save_dtn(const DtNMatrix& dtn, const std::string& path);
DtNMatrix load_dtn(const std::string& path);

struct EnergyIdentity {
    Complex lhs;  // boundary pairing of (Lambda_0 - Lambda_D) conj(f) against f
    Complex rhs;  // bulk energy difference decomposition
    double residual;
};
// f_ring: Dirichlet nodal data on the canonical outer ring of triangulate(scene, h)
EnergyIdentity energy_identity_residual(const Scene& scene, const CVec& f_ring, double h);

// Eigenvalues of (stiffness) x = lambda (mass) x on the free dofs nearest to shift,
// by shift-inverted subspace iteration. deflate: direction projected out (in the
// mass inner product), e.g. constants for pure Neumann problems.
std::vector<double> generalized_eigs_near(const Eigen::SparseMatrix<double>& K,
                                          const Eigen::SparseMatrix<double>& M,
                                          const std::vector<int>& free_dofs, double shift,
                                          int count, const Eigen::VectorXd* deflate = nullptr);

struct AdmissibilityReport {
    double nearest_dirichlet = 0;  // discrete Dirichlet eigenvalue of -Laplace on Omega nearest k^2
    double nearest_mixed = 0;      // same for the mixed problem on the complement
    double dirichlet_gap_rel = 1;
    double mixed_gap_rel = 1;
    bool admissible = true;
};
AdmissibilityReport check_admissibility(const Scene& scene, double h);

}  // namespace probe
