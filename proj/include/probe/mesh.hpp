#pragma once

#include "probe/geometry.hpp"

#include <array>
#include <vector>

namespace probe {

class MeshError : public std::runtime_error {
  public:
    MeshError(std::string code_, const std::string& what_)
        : std::runtime_error(what_), code(std::move(code_)) {}
    std::string code;
};

struct MeshEdge {
    int a = -1;
    int b = -1;
    int tag = 0;  // 0 = outer boundary, 1 + j = boundary of obstacle j
};

// Conforming P1 triangulation of the whole domain. Obstacle boundaries appear as
// interior interfaces with nodes exactly on the shape boundaries; triangles carry a
// region tag (0 = complement of the obstacles, 1 + j = inside obstacle j).
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;  // CCW
    std::vector<int> tri_region;
    std::vector<MeshEdge> boundary_edges;   // outer boundary, tag 0
    std::vector<MeshEdge> interface_edges;  // obstacle boundaries, tag 1 + j
    double h = 0.0;
    std::vector<int> parent_node;  // into the parent mesh after restriction, else empty

    double min_angle_deg() const;
    int euler_characteristic() const;
    double area() const;
    // outer boundary node ids ordered along the boundary (CCW)
    std::vector<int> outer_boundary_loop() const;
    // node ids on interface of obstacle j ordered along it
    std::vector<int> interface_loop(int j) const;
    double triangle_area(int t) const;
};

// Builds the full-domain mesh. Throws MeshError("mesh_quality_failure") when the
// requested h cannot produce a conforming mesh with min angle >= 20 degrees or when
// an obstacle boundary would get fewer than 8 edges.
Mesh triangulate(const Scene& scene, double h);

// Mesh of the complement: drops obstacle-interior triangles, compacts node ids,
// moves interface edges into boundary_edges, and records parent_node.
Mesh restrict_to_complement(const Mesh& mesh);

}  // namespace probe
