#include "plume/mesh.hpp"

#include <stdexcept>

namespace plume::fem {

Mesh build_mesh(int n_per_side) {
    if (n_per_side < 3) {
        throw std::invalid_argument("build_mesh: n_per_side must be >= 3, got " +
                                    std::to_string(n_per_side));
    }
    Mesh mesh;
    mesh.n_per_side = n_per_side;
    const int n = n_per_side;
    mesh.h = 1.0 / static_cast<double>(n - 1);

    mesh.nodes.reserve(static_cast<std::size_t>(n) * n);
    mesh.boundary_mask.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // Endpoints exact so the boundary mask is a clean comparison.
            double x = (i == n - 1) ? 1.0 : i * mesh.h;
            double y = (j == n - 1) ? 1.0 : j * mesh.h;
            mesh.nodes.push_back({x, y});
            bool bdry = (i == 0 || i == n - 1 || j == 0 || j == n - 1);
            mesh.boundary_mask.push_back(bdry ? 1 : 0);
        }
    }

    mesh.elements.reserve(2 * static_cast<std::size_t>(n - 1) * (n - 1));
    for (int j = 0; j < n - 1; ++j) {
        for (int i = 0; i < n - 1; ++i) {
            int ll = mesh.node_id(i, j);
            int lr = mesh.node_id(i + 1, j);
            int ul = mesh.node_id(i, j + 1);
            int ur = mesh.node_id(i + 1, j + 1);
            mesh.elements.push_back({ll, lr, ur});
            mesh.elements.push_back({ll, ur, ul});
        }
    }

    mesh.interior_index.assign(mesh.nodes.size(), -1);
    int next = 0;
    for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
        if (!mesh.boundary_mask[k]) mesh.interior_index[k] = next++;
    }
    mesh.n_interior = next;
    return mesh;
}

std::shared_ptr<const Mesh> build_mesh_shared(int n_per_side) {
    return std::make_shared<const Mesh>(build_mesh(n_per_side));
}

}  // namespace plume::fem
