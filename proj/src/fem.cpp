#include "plume/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "plume/textio.hpp"

namespace plume::fem {

namespace {

constexpr double kResidualTol = 1e-10;

struct Located {
    int element = -1;
    std::array<double, 3> lambda{};  // barycentric weights, element vertex order
};

bool inside_closed_domain(Vec2 x) {
    return x.x >= 0.0 && x.x <= 1.0 && x.y >= 0.0 && x.y <= 1.0;
}

/// Structured point location: cell from integer division, triangle from the
/// diagonal test xi >= eta.
Located locate(const Mesh& mesh, Vec2 x) {
    const int n = mesh.n_per_side;
    const double h = mesh.h;
    int ix = std::min(static_cast<int>(x.x / h), n - 2);
    int iy = std::min(static_cast<int>(x.y / h), n - 2);
    ix = std::max(ix, 0);
    iy = std::max(iy, 0);
    double xi = x.x / h - ix;
    double eta = x.y / h - iy;

    Located loc;
    const int cell = iy * (n - 1) + ix;
    if (xi >= eta) {
        loc.element = 2 * cell;  // (ll, lr, ur)
        loc.lambda = {1.0 - xi, xi - eta, eta};
    } else {
        loc.element = 2 * cell + 1;  // (ll, ur, ul)
        loc.lambda = {1.0 - eta, xi, eta - xi};
    }
    return loc;
}

void basis_gradients(const Mesh& mesh, const std::array<int, 3>& tri, Vec2 grad[3]) {
    const Vec2& a = mesh.nodes[static_cast<std::size_t>(tri[0])];
    const Vec2& b = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const Vec2& c = mesh.nodes[static_cast<std::size_t>(tri[2])];
    const double two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    grad[0] = {(b.y - c.y) / two_area, (c.x - b.x) / two_area};
    grad[1] = {(c.y - a.y) / two_area, (a.x - c.x) / two_area};
    grad[2] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
}

void check_residual(const SparseOperator& op, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    const char* method) {
    const double bnorm = b.norm();
    const double rel = bnorm > 0 ? (op.matrix * x - b).norm() / bnorm : (op.matrix * x).norm();
    if (!(rel <= kResidualTol)) {
        throw std::runtime_error(std::string("steady solve (") + method +
                                 ") missed residual tolerance: rel=" + format_double(rel));
    }
}

NodalField field_from_interior(std::shared_ptr<const Mesh> mesh, const Eigen::VectorXd& interior,
                               Vec2 source_position) {
    NodalField field;
    field.mesh = std::move(mesh);
    field.source_position = source_position;
    field.values.assign(field.mesh->nodes.size(), 0.0);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        int idx = field.mesh->interior_index[k];
        if (idx >= 0) {
            double v = interior[idx];
            if (!std::isfinite(v)) throw std::runtime_error("steady solve produced non-finite values");
            field.values[k] = v;
        }
    }
    return field;
}

}  // namespace

SparseOperator assemble_system(const Mesh& mesh, double kappa, Vec2 velocity) {
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("assemble_system: kappa must be positive");
    }
    SparseOperator op;
    op.kappa = kappa;
    op.velocity = velocity;
    op.dimension = mesh.n_interior;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.elements.size() * 9);

    Vec2 grad[3];
    for (const auto& tri : mesh.elements) {
        const double area = mesh.triangle_signed_area(tri);
        if (!(area > 0.0)) {
            throw std::invalid_argument("assemble_system: degenerate or inverted triangle");
        }
        basis_gradients(mesh, tri, grad);
        for (int i = 0; i < 3; ++i) {
            const int row = mesh.interior_index[static_cast<std::size_t>(tri[i])];
            if (row < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int col = mesh.interior_index[static_cast<std::size_t>(tri[j])];
                if (col < 0) continue;
                // kappa * grad(phi_j).grad(phi_i) * area  +  (v.grad(phi_j)) * int(phi_i)
                const double diff = kappa * grad[i].dot(grad[j]) * area;
                const double adv = velocity.dot(grad[j]) * area / 3.0;
                triplets.emplace_back(row, col, diff + adv);
            }
        }
    }

    op.matrix.resize(op.dimension, op.dimension);
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    return op;
}

std::vector<double> delta_load_full(const Mesh& mesh, Vec2 p) {
    if (!kDomain.contains_strict(p)) {
        throw std::invalid_argument("delta load: source must lie strictly inside the domain");
    }
    std::vector<double> load(mesh.nodes.size(), 0.0);
    const Located loc = locate(mesh, p);
    const auto& tri = mesh.elements[static_cast<std::size_t>(loc.element)];
    for (int i = 0; i < 3; ++i) {
        load[static_cast<std::size_t>(tri[i])] += loc.lambda[static_cast<std::size_t>(i)];
    }
    return load;
}

Eigen::VectorXd assemble_delta_load(const Mesh& mesh, Vec2 p) {
    const auto full = delta_load_full(mesh, p);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.n_interior);
    for (std::size_t k = 0; k < full.size(); ++k) {
        if (full[k] != 0.0) {
            int idx = mesh.interior_index[k];
            if (idx >= 0) load[idx] = full[k];
        }
    }
    return load;
}

NodalField solve_steady(const SparseOperator& op, const Eigen::VectorXd& load,
                        std::shared_ptr<const Mesh> mesh, Vec2 source_position) {
    if (load.size() != op.dimension) {
        throw std::invalid_argument("solve_steady: load dimension mismatch");
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(op.matrix);
    if (lu.info() == Eigen::Success) {
        Eigen::VectorXd x = lu.solve(load);
        if (lu.info() == Eigen::Success) {
            check_residual(op, x, load, "SparseLU");
            return field_from_interior(std::move(mesh), x, source_position);
        }
    }
    // Krylov fallback for the non-symmetric system.
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> krylov;
    krylov.setTolerance(kResidualTol * 0.1);
    krylov.setMaxIterations(20000);
    krylov.compute(op.matrix);
    Eigen::VectorXd x = krylov.solve(load);
    if (krylov.info() != Eigen::Success) {
        throw std::runtime_error("steady solve failed: direct factorization and BiCGSTAB both unsuccessful");
    }
    check_residual(op, x, load, "BiCGSTAB");
    return field_from_interior(std::move(mesh), x, source_position);
}

struct SteadySolver::Impl {
    std::shared_ptr<const Mesh> mesh;
    SparseOperator op;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

SteadySolver::SteadySolver(std::shared_ptr<const Mesh> mesh, double kappa, Vec2 velocity)
    : impl_(std::make_unique<Impl>()) {
    impl_->mesh = std::move(mesh);
    impl_->op = assemble_system(*impl_->mesh, kappa, velocity);
    impl_->lu.compute(impl_->op.matrix);
    if (impl_->lu.info() != Eigen::Success) {
        throw std::runtime_error("SteadySolver: sparse factorization failed (singular system?)");
    }
}

SteadySolver::~SteadySolver() = default;

NodalField SteadySolver::solve(Vec2 source_position) const {
    return solve_load(assemble_delta_load(*impl_->mesh, source_position), source_position);
}

NodalField SteadySolver::solve_load(const Eigen::VectorXd& interior_load, Vec2 tag) const {
    if (interior_load.size() != impl_->op.dimension) {
        throw std::invalid_argument("SteadySolver: load dimension mismatch");
    }
    Eigen::VectorXd x = impl_->lu.solve(interior_load);
    check_residual(impl_->op, x, interior_load, "SparseLU");
    return field_from_interior(impl_->mesh, x, tag);
}

std::vector<NodalField> SteadySolver::solve_many(const std::vector<Vec2>& sources) const {
    // Column at a time, not a dense RHS block: Eigen's block triangular solve
    // reorders last-bit arithmetic, and a batch must be bit-identical to the
    // same solves issued one by one. The batching win is factorization reuse,
    // which a per-column solve keeps.
    std::vector<NodalField> fields;
    fields.reserve(sources.size());
    for (const Vec2& p : sources) fields.push_back(solve(p));
    return fields;
}

const SparseOperator& SteadySolver::op() const { return impl_->op; }
const std::shared_ptr<const Mesh>& SteadySolver::mesh() const { return impl_->mesh; }

PointSample eval_field(const NodalField& field, Vec2 x) {
    if (!inside_closed_domain(x)) {
        throw std::invalid_argument("eval_field: point outside the domain");
    }
    const Mesh& mesh = *field.mesh;
    const Located loc = locate(mesh, x);
    const auto& tri = mesh.elements[static_cast<std::size_t>(loc.element)];

    PointSample sample;
    Vec2 grad[3];
    basis_gradients(mesh, tri, grad);
    for (int i = 0; i < 3; ++i) {
        const double v = field.values[static_cast<std::size_t>(tri[i])];
        sample.value += loc.lambda[static_cast<std::size_t>(i)] * v;
        sample.gradient += grad[i] * v;
    }
    return sample;
}

ManufacturedErrors verify_manufactured(double kappa, Vec2 velocity, int n_per_side) {
    auto mesh = build_mesh_shared(n_per_side);
    const SparseOperator op = assemble_system(*mesh, kappa, velocity);

    const double pi = M_PI;
    auto exact = [pi](Vec2 r) { return std::sin(pi * r.x) * std::sin(pi * r.y); };
    auto rhs = [&](Vec2 r) {
        return 2.0 * pi * pi * kappa * std::sin(pi * r.x) * std::sin(pi * r.y) +
               velocity.x * pi * std::cos(pi * r.x) * std::sin(pi * r.y) +
               velocity.y * pi * std::sin(pi * r.x) * std::cos(pi * r.y);
    };

    // Edge-midpoint quadrature (exact for quadratics): phi_i is 1/2 on the two
    // edges touching vertex i and 0 on the opposite edge.
    std::vector<double> load_full(mesh->nodes.size(), 0.0);
    for (const auto& tri : mesh->elements) {
        const double area = mesh->triangle_signed_area(tri);
        Vec2 v[3];
        for (int i = 0; i < 3; ++i) v[i] = mesh->nodes[static_cast<std::size_t>(tri[i])];
        const Vec2 mid[3] = {(v[0] + v[1]) * 0.5, (v[1] + v[2]) * 0.5, (v[2] + v[0]) * 0.5};
        const double s[3] = {rhs(mid[0]), rhs(mid[1]), rhs(mid[2])};
        load_full[static_cast<std::size_t>(tri[0])] += area / 6.0 * (s[0] + s[2]);
        load_full[static_cast<std::size_t>(tri[1])] += area / 6.0 * (s[0] + s[1]);
        load_full[static_cast<std::size_t>(tri[2])] += area / 6.0 * (s[1] + s[2]);
    }
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh->n_interior);
    for (std::size_t k = 0; k < load_full.size(); ++k) {
        int idx = mesh->interior_index[k];
        if (idx >= 0) load[idx] = load_full[k];
    }

    const NodalField field = solve_steady(op, load, mesh, Vec2{0.5, 0.5});

    ManufacturedErrors err;
    double l2sq = 0.0;
    for (const auto& tri : mesh->elements) {
        const double area = mesh->triangle_signed_area(tri);
        Vec2 v[3];
        double u[3];
        for (int i = 0; i < 3; ++i) {
            v[i] = mesh->nodes[static_cast<std::size_t>(tri[i])];
            u[i] = field.values[static_cast<std::size_t>(tri[i])];
        }
        for (int e = 0; e < 3; ++e) {
            const Vec2 m = (v[e] + v[(e + 1) % 3]) * 0.5;
            const double uh = 0.5 * (u[e] + u[(e + 1) % 3]);
            const double d = uh - exact(m);
            l2sq += area / 3.0 * d * d;
        }
    }
    err.l2 = std::sqrt(l2sq);
    for (std::size_t k = 0; k < mesh->nodes.size(); ++k) {
        err.linf = std::max(err.linf, std::abs(field.values[k] - exact(mesh->nodes[k])));
    }
    return err;
}

void write_field_csv(const NodalField& field, std::ostream& out) {
    out << "x_km,y_km,u\n";
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const Vec2& r = field.mesh->nodes[k];
        out << format_double(r.x) << ',' << format_double(r.y) << ',' << format_double(field.values[k])
            << '\n';
    }
}

}  // namespace plume::fem
