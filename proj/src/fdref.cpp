#include "fkwalk/fdref.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fkwalk {

namespace {

constexpr double kMinArm = 1e-6;  // guards against degenerate cut arms

}  // namespace

StencilSystem rasterize(const DomainSpec& domain, int nx, int ny,
                        BoundaryTreatment treatment) {
    domain.validate();
    if (nx < 8 || ny < 8) throw std::invalid_argument("rasterize: nx, ny must be >= 8");

    StencilSystem sys;
    sys.nx = nx;
    sys.ny = ny;
    sys.extent = domain.outer_half_width;
    sys.hx = 2.0 * sys.extent / (nx - 1);
    sys.hy = 2.0 * sys.extent / (ny - 1);
    sys.nodes.assign(static_cast<std::size_t>(nx) * ny, {});

    std::vector<long> inclusion_nodes(domain.inclusions.size(), 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point2 p{sys.node_x(i), sys.node_y(j)};
            StencilSystem::Node& node = sys.at(i, j);
            const RegionClass rc = classify(domain, p);
            switch (rc.kind) {
                case RegionClass::Kind::Interior:
                    node.unknown = true;
                    ++sys.unknown_count;
                    break;
                case RegionClass::Kind::Boundary:
                    node.value = boundary_value_at(domain, rc.region, p);
                    if (rc.region >= 0) ++inclusion_nodes[rc.region];
                    break;
                case RegionClass::Kind::Exterior:
                    node.value = boundary_value_at(domain, kOuterRegion, p);
                    break;
            }
        }
    }
    if (sys.unknown_count == 0)
        throw std::invalid_argument("rasterize: no interior nodes at this resolution");
    for (std::size_t k = 0; k < inclusion_nodes.size(); ++k)
        if (inclusion_nodes[k] == 0)
            throw std::invalid_argument("rasterize: grid too coarse to resolve inclusion " +
                                        std::to_string(k));

    // Arm setup. Staircase: every fixed neighbor terminates the arm at the
    // full spacing with the neighbor's node value. Fitted: arms terminate at
    // the true boundary crossing with the value there.
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            StencilSystem::Node& node = sys.at(i, j);
            if (!node.unknown) continue;
            const Point2 p{sys.node_x(i), sys.node_y(j)};
            for (int d = 0; d < 4; ++d) {
                const int ni = i + di[d];
                const int nj = j + dj[d];
                const StencilSystem::Node& nbr = sys.at(ni, nj);
                if (treatment == BoundaryTreatment::FittedArms) {
                    const Point2 q{sys.node_x(ni), sys.node_y(nj)};
                    if (auto hit = segment_exit(domain, p, q)) {
                        node.cut[d] = true;
                        node.theta[d] = std::max(hit->fraction, kMinArm);
                        node.arm_value[d] =
                            boundary_value_at(domain, hit->region, hit->point);
                        continue;
                    }
                    // No crossing: the neighbor is interior (or exactly on
                    // the rim, which segment_exit reports as a hit).
                    if (!nbr.unknown) {
                        node.cut[d] = true;
                        node.arm_value[d] = nbr.value;
                    }
                } else if (!nbr.unknown) {
                    node.cut[d] = true;
                    node.arm_value[d] = nbr.value;
                }
            }
        }
    }
    return sys;
}

namespace {

// Assembled A u = b over the unknowns, A = -alpha*lap - omega.grad + sigma.
struct Assembled {
    std::vector<long> unknown_of_node;  // -1 for fixed nodes
    std::vector<int> node_i, node_j;
    std::vector<double> diag, rhs;
    std::vector<double> coef[4];  // neighbor coefficients, 0 when cut
};

Assembled assemble(const StencilSystem& sys, const SdeParams& params) {
    params.validate();
    if (!(params.alpha > 0.0))
        throw std::invalid_argument("solve_fd: alpha must be > 0");
    const double peclet = std::max(std::abs(params.omega_x) * sys.hx,
                                   std::abs(params.omega_y) * sys.hy) /
                          (2.0 * params.alpha);
    if (peclet >= 1.0)
        throw std::invalid_argument("solve_fd: grid Peclet number must be < 1");

    Assembled as;
    as.unknown_of_node.assign(sys.nodes.size(), -1);
    long m = 0;
    for (std::size_t idx = 0; idx < sys.nodes.size(); ++idx)
        if (sys.nodes[idx].unknown) as.unknown_of_node[idx] = m++;
    as.node_i.resize(m);
    as.node_j.resize(m);
    as.diag.assign(m, 0.0);
    as.rhs.assign(m, params.source_f);
    for (auto& c : as.coef) c.assign(m, 0.0);

    for (int j = 0; j < sys.ny; ++j) {
        for (int i = 0; i < sys.nx; ++i) {
            const long u = as.unknown_of_node[static_cast<std::size_t>(j) * sys.nx + i];
            if (u < 0) continue;
            as.node_i[u] = i;
            as.node_j[u] = j;
            const StencilSystem::Node& node = sys.at(i, j);

            // Shortley-Weller second differences and generalized central
            // first differences on possibly unequal arms.
            // x axis
            {
                const double tp = node.theta[StencilSystem::E];
                const double tm = node.theta[StencilSystem::W];
                const double s = 2.0 * params.alpha / (sys.hx * sys.hx);
                double cE = -s / (tp * (tp + tm));
                double cW = -s / (tm * (tp + tm));
                as.diag[u] += s / (tp * tm);
                if (params.omega_x != 0.0) {
                    const double denom = (tp + tm) * sys.hx;
                    cE += -params.omega_x * tm / (tp * denom);
                    cW += params.omega_x * tp / (tm * denom);
                    as.diag[u] += -params.omega_x * (tp - tm) / (tp * tm * sys.hx);
                }
                as.coef[StencilSystem::E][u] = cE;
                as.coef[StencilSystem::W][u] = cW;
            }
            // y axis
            {
                const double tp = node.theta[StencilSystem::N];
                const double tm = node.theta[StencilSystem::S];
                const double s = 2.0 * params.alpha / (sys.hy * sys.hy);
                double cN = -s / (tp * (tp + tm));
                double cS = -s / (tm * (tp + tm));
                as.diag[u] += s / (tp * tm);
                if (params.omega_y != 0.0) {
                    const double denom = (tp + tm) * sys.hy;
                    cN += -params.omega_y * tm / (tp * denom);
                    cS += params.omega_y * tp / (tm * denom);
                    as.diag[u] += -params.omega_y * (tp - tm) / (tp * tm * sys.hy);
                }
                as.coef[StencilSystem::N][u] = cN;
                as.coef[StencilSystem::S][u] = cS;
            }
            as.diag[u] += params.sigma_abs;

            // Fold cut arms into the right-hand side.
            for (int d = 0; d < 4; ++d) {
                if (node.cut[d]) {
                    as.rhs[u] -= as.coef[d][u] * node.arm_value[d];
                    as.coef[d][u] = 0.0;
                }
            }
        }
    }
    return as;
}

double rhs_norm(const Assembled& as) {
    double s = 0.0;
    for (double v : as.rhs) s += v * v;
    return std::sqrt(s);
}

// Neighbor unknown index in direction d, -1 when fixed/cut.
inline long nbr_index(const Assembled& as, const StencilSystem& sys, long u, int d) {
    static const int di[4] = {1, -1, 0, 0};
    static const int dj[4] = {0, 0, 1, -1};
    const int i = as.node_i[u] + di[d];
    const int j = as.node_j[u] + dj[d];
    return as.unknown_of_node[static_cast<std::size_t>(j) * sys.nx + i];
}

double residual_norm(const Assembled& as, const StencilSystem& sys,
                     const std::vector<double>& u) {
    double s = 0.0;
    const long m = static_cast<long>(as.diag.size());
    for (long k = 0; k < m; ++k) {
        double au = as.diag[k] * u[k];
        for (int d = 0; d < 4; ++d) {
            if (as.coef[d][k] != 0.0) {
                const long nk = nbr_index(as, sys, k, d);
                if (nk >= 0) au += as.coef[d][k] * u[nk];
            }
        }
        const double r = as.rhs[k] - au;
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace

FieldGrid solve_fd(const StencilSystem& sys, const SdeParams& params, double tol,
                   long max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_fd: tol must be > 0");
    if (max_iter <= 0) throw std::invalid_argument("solve_fd: max_iter must be > 0");

    const Assembled as = assemble(sys, params);
    const long m = static_cast<long>(as.diag.size());
    std::vector<double> u(m, 0.0);

    // Relaxation factor: near-optimal SOR for the pure-diffusion operator,
    // plain Gauss-Seidel when drift makes the system nonsymmetric.
    double relax = 1.0;
    if (params.omega_x == 0.0 && params.omega_y == 0.0) {
        const double rho = 0.5 * (std::cos(std::numbers::pi * sys.hx / (2.0 * sys.extent)) +
                                  std::cos(std::numbers::pi * sys.hy / (2.0 * sys.extent)));
        relax = std::clamp(2.0 / (1.0 + std::sqrt(1.0 - rho * rho)), 1.0, 1.95);
    }

    const double b_norm = std::max(rhs_norm(as), 1e-300);
    long iter = 0;
    bool converged = false;
    while (iter < max_iter) {
        for (long sweep = 0; sweep < 8 && iter < max_iter; ++sweep, ++iter) {
            for (long k = 0; k < m; ++k) {
                double sum = as.rhs[k];
                for (int d = 0; d < 4; ++d) {
                    if (as.coef[d][k] != 0.0) {
                        const long nk = nbr_index(as, sys, k, d);
                        if (nk >= 0) sum -= as.coef[d][k] * u[nk];
                    }
                }
                const double gs = sum / as.diag[k];
                u[k] += relax * (gs - u[k]);
            }
        }
        if (residual_norm(as, sys, u) / b_norm <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged && residual_norm(as, sys, u) / b_norm > tol)
        throw std::runtime_error("solve_fd: no convergence within max_iter sweeps");

    FieldGrid grid = FieldGrid::make(sys.nx, sys.ny, sys.extent);
    for (int j = 0; j < sys.ny; ++j) {
        for (int i = 0; i < sys.nx; ++i) {
            const long k = as.unknown_of_node[static_cast<std::size_t>(j) * sys.nx + i];
            if (k >= 0)
                grid.at(i, j) = {CellClass::Solved, u[k], 0.0, 0};
            else
                grid.at(i, j) = {CellClass::FixedBoundary, sys.at(i, j).value, 0.0, 0};
        }
    }
    return grid;
}

double fd_relative_residual(const StencilSystem& sys, const SdeParams& params,
                            const FieldGrid& field) {
    if (field.nx != sys.nx || field.ny != sys.ny)
        throw std::invalid_argument("fd_relative_residual: grid shape mismatch");
    const Assembled as = assemble(sys, params);
    std::vector<double> u(as.diag.size(), 0.0);
    for (std::size_t idx = 0; idx < sys.nodes.size(); ++idx) {
        const long k = as.unknown_of_node[idx];
        if (k >= 0) u[k] = field.cells[idx].mean;
    }
    return residual_norm(as, sys, u) / std::max(rhs_norm(as), 1e-300);
}

ErrorStats compare(const FieldGrid& a, const FieldGrid& b) {
    if (a.nx != b.nx || a.ny != b.ny)
        throw std::invalid_argument("compare: grid shapes differ");
    if (std::abs(a.extent - b.extent) > 1e-9 * std::max(a.extent, b.extent))
        throw std::invalid_argument("compare: grid extents differ");

    ErrorStats stats;
    stats.error = FieldGrid::make(a.nx, a.ny, a.extent);
    double sum_abs = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        const FieldCell& ca = a.cells[k];
        const FieldCell& cb = b.cells[k];
        if (ca.cls == CellClass::Solved && cb.cls == CellClass::Solved) {
            const double e = ca.mean - cb.mean;
            stats.error.cells[k] = {CellClass::Solved, e, std::hypot(ca.se, cb.se),
                                    std::min(ca.n, cb.n)};
            stats.max_abs = std::max(stats.max_abs, std::abs(e));
            sum_abs += std::abs(e);
            sum_sq += e * e;
            ++stats.count;
        } else {
            stats.error.cells[k] = {CellClass::Invalid, 0.0, 0.0, 0};
        }
    }
    if (stats.count > 0) {
        sum_abs /= static_cast<double>(stats.count);
        stats.mean_abs = sum_abs;
        stats.rms = std::sqrt(sum_sq / static_cast<double>(stats.count));
    }
    return stats;
}

FieldGrid resample_bilinear(const FieldGrid& src, int nx, int ny) {
    FieldGrid out = FieldGrid::make(nx, ny, src.extent);
    auto usable = [](const FieldCell& c) { return c.cls != CellClass::Invalid; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double x = out.node_x(i);
            const double y = out.node_y(j);
            const double fx = (x + src.extent) / (2.0 * src.extent) * (src.nx - 1);
            const double fy = (y + src.extent) / (2.0 * src.extent) * (src.ny - 1);
            const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.nx - 2);
            const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.ny - 2);
            const double wx = std::clamp(fx - i0, 0.0, 1.0);
            const double wy = std::clamp(fy - j0, 0.0, 1.0);
            const FieldCell& c00 = src.at(i0, j0);
            const FieldCell& c10 = src.at(i0 + 1, j0);
            const FieldCell& c01 = src.at(i0, j0 + 1);
            const FieldCell& c11 = src.at(i0 + 1, j0 + 1);
            if (usable(c00) && usable(c10) && usable(c01) && usable(c11)) {
                const double v = (1 - wy) * ((1 - wx) * c00.mean + wx * c10.mean) +
                                 wy * ((1 - wx) * c01.mean + wx * c11.mean);
                const double se = (1 - wy) * ((1 - wx) * c00.se + wx * c10.se) +
                                  wy * ((1 - wx) * c01.se + wx * c11.se);
                out.at(i, j) = {CellClass::Solved, v, se, 0};
            } else {
                out.at(i, j) = {CellClass::Invalid, 0.0, 0.0, 0};
            }
        }
    }
    return out;
}

}  // namespace fkwalk
