#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "plume/geometry.hpp"

namespace plume::fem {

/// Uniform Friedrichs-Keller triangulation of the unit square: every grid cell
/// is split along its lower-left to upper-right diagonal. Nodes are stored
/// row-major with x varying fastest; triangles are counterclockwise.
struct Mesh {
    int n_per_side = 0;
    double h = 0.0;  // km
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> elements;
    std::vector<std::uint8_t> boundary_mask;

    // Interior DOF numbering: -1 for boundary nodes.
    std::vector<int> interior_index;
    int n_interior = 0;

    int node_id(int i, int j) const { return j * n_per_side + i; }
    bool is_boundary(int node) const { return boundary_mask[static_cast<std::size_t>(node)] != 0; }

    double triangle_signed_area(const std::array<int, 3>& tri) const {
        const Vec2& a = nodes[static_cast<std::size_t>(tri[0])];
        const Vec2& b = nodes[static_cast<std::size_t>(tri[1])];
        const Vec2& c = nodes[static_cast<std::size_t>(tri[2])];
        return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    }
};

/// Builds the n x n Friedrichs-Keller mesh of [0,1]^2, h = 1/(n-1).
/// Throws std::invalid_argument for n_per_side < 3.
Mesh build_mesh(int n_per_side);

std::shared_ptr<const Mesh> build_mesh_shared(int n_per_side);

}  // namespace plume::fem
