#pragma once

#include <Eigen/Sparse>
#include <iosfwd>
#include <memory>
#include <vector>

#include "plume/mesh.hpp"

namespace plume::fem {

/// Discrete -kappa*Laplace + v.grad operator on interior DOFs (Dirichlet rows
/// and columns eliminated). Non-symmetric unless velocity is zero.
struct SparseOperator {
    int dimension = 0;
    double kappa = 0.0;
    Vec2 velocity;
    Eigen::SparseMatrix<double> matrix;  // dimension x dimension, compressed
};

/// Nodal P1 concentration field for one source position. Values cover all
/// mesh nodes; boundary entries are exactly zero.
struct NodalField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;
    Vec2 source_position;
};

struct PointSample {
    double value = 0.0;
    Vec2 gradient;  // per-km, piecewise constant over triangles
};

/// Galerkin P1 assembly of -kappa*Laplace(u) + v.grad(u) on interior DOFs.
/// Throws std::invalid_argument for kappa <= 0 or a degenerate mesh.
SparseOperator assemble_system(const Mesh& mesh, double kappa, Vec2 velocity);

/// Weak Dirac load over all nodes: entry i = phi_i(p). Sums to one.
/// Throws std::invalid_argument unless p is strictly inside the domain.
std::vector<double> delta_load_full(const Mesh& mesh, Vec2 p);

/// Same load restricted to interior DOFs, ready for solve_steady.
Eigen::VectorXd assemble_delta_load(const Mesh& mesh, Vec2 p);

/// Direct sparse solve (SparseLU) with a BiCGSTAB fallback; enforces relative
/// residual <= 1e-10 and throws std::runtime_error otherwise.
NodalField solve_steady(const SparseOperator& op, const Eigen::VectorXd& load,
                        std::shared_ptr<const Mesh> mesh, Vec2 source_position);

/// Factorizes once and serves many right-hand sides. Immutable after
/// construction; solves share the factorization.
class SteadySolver {
public:
    SteadySolver(std::shared_ptr<const Mesh> mesh, double kappa, Vec2 velocity);
    ~SteadySolver();
    SteadySolver(const SteadySolver&) = delete;
    SteadySolver& operator=(const SteadySolver&) = delete;

    NodalField solve(Vec2 source_position) const;
    NodalField solve_load(const Eigen::VectorXd& interior_load, Vec2 tag) const;
    /// Batched multi-RHS solve; one factorization pass over column blocks.
    std::vector<NodalField> solve_many(const std::vector<Vec2>& sources) const;

    const SparseOperator& op() const;
    const std::shared_ptr<const Mesh>& mesh() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Barycentric value and per-triangle P1 gradient at x in the closed domain.
/// Throws std::invalid_argument for points outside.
PointSample eval_field(const NodalField& field, Vec2 x);

struct ManufacturedErrors {
    double l2 = 0.0;
    double linf = 0.0;
};

/// Solves with the smooth right-hand side matching u* = sin(pi x) sin(pi y)
/// and returns discretization error norms. Forward-solver oracle.
ManufacturedErrors verify_manufactured(double kappa, Vec2 velocity, int n_per_side);

/// CSV export, header "x_km,y_km,u", row-major nodes.
void write_field_csv(const NodalField& field, std::ostream& out);

}  // namespace plume::fem
