// Finite-difference reference solver for the same PDE on a rasterized
// grid, plus field comparison utilities. Serves as the high-accuracy
// oracle the Monte Carlo fields are validated against.
#pragma once

#include "fkwalk/estimator.hpp"

namespace fkwalk {

// Staircase fixes nodes by point membership; FittedArms additionally cuts
// stencil arms at curved boundaries (Shortley-Weller), restoring
// second-order accuracy there.
enum class BoundaryTreatment { Staircase, FittedArms };

struct StencilSystem {
    // Arm directions, also the neighbor order in the 5-point operator.
    enum { E = 0, W = 1, N = 2, S = 3 };

    struct Node {
        bool unknown = false;
        double value = 0.0;        // Dirichlet value when fixed
        double theta[4] = {1, 1, 1, 1};  // arm length as a fraction of h
        double arm_value[4] = {0, 0, 0, 0};
        bool cut[4] = {false, false, false, false};
    };

    int nx = 0;
    int ny = 0;
    double extent = 1.0;
    double hx = 0.0;
    double hy = 0.0;
    std::vector<Node> nodes;  // row-major, y outer
    long unknown_count = 0;

    Node& at(int i, int j) { return nodes[static_cast<std::size_t>(j) * nx + i]; }
    const Node& at(int i, int j) const { return nodes[static_cast<std::size_t>(j) * nx + i]; }
    double node_x(int i) const { return -extent + 2.0 * extent * i / (nx - 1); }
    double node_y(int j) const { return -extent + 2.0 * extent * j / (ny - 1); }
};

// Grid over the domain's bounding square, nodes fixed by region membership.
// Throws std::invalid_argument when the grid cannot resolve the geometry
// (an inclusion without any grid node, or nothing left to solve).
StencilSystem rasterize(const DomainSpec& domain, int nx, int ny,
                        BoundaryTreatment treatment = BoundaryTreatment::Staircase);

// SOR solve of alpha*lap(u) + omega.grad(u) - sigma*u + f = 0 to a relative
// residual <= tol. Requires alpha > 0 and grid Peclet number < 1. Throws
// std::runtime_error when max_iter sweeps do not reach tol.
FieldGrid solve_fd(const StencilSystem& system, const SdeParams& params, double tol,
                   long max_iter);

// Recomputed ||b - A u||_2 / ||b||_2 for an already-solved field.
double fd_relative_residual(const StencilSystem& system, const SdeParams& params,
                            const FieldGrid& field);

struct ErrorStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double rms = 0.0;
    long count = 0;       // cells compared
    FieldGrid error;      // signed a - b where both are Solved
};

// Cell-by-cell difference restricted to cells Solved in both grids.
// Shapes must match exactly.
ErrorStats compare(const FieldGrid& a, const FieldGrid& b);

// Bilinear resampling onto an nx x ny grid with the same extent; used to
// bring a fine reference field onto a coarse grid's nodes.
FieldGrid resample_bilinear(const FieldGrid& src, int nx, int ny);

}  // namespace fkwalk
