#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "fkwalk/fdref.hpp"

using namespace fkwalk;

namespace {

// Torsion-function oracle: solution of lap(phi) = -1 on [-1,1]^2, phi = 0
// on the boundary, evaluated by the classical cosh series.
double torsion_center() {
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 39; k += 2) {
        const double sign = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
        sum += sign / (k * k * k * std::cosh(k * pi / 2.0));
    }
    return 0.5 - 16.0 / (pi * pi * pi) * sum;
}

double bilinear_at(const FieldGrid& g, double x, double y) {
    const double fx = (x + g.extent) / (2.0 * g.extent) * (g.nx - 1);
    const double fy = (y + g.extent) / (2.0 * g.extent) * (g.ny - 1);
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    const double wx = fx - i0, wy = fy - j0;
    return (1 - wy) * ((1 - wx) * g.at(i0, j0).mean + wx * g.at(i0 + 1, j0).mean) +
           wy * ((1 - wx) * g.at(i0, j0 + 1).mean + wx * g.at(i0 + 1, j0 + 1).mean);
}

DomainSpec unit_disk_with(std::function<double(Point2)> fn) {
    DomainSpec d;
    d.outer_shape = OuterShape::Disk;
    d.outer_half_width = 1.0;
    d.outer_value_fn = std::move(fn);
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("fdref");

TEST_CASE("rasterize: fixed nodes and system size") {
    const DomainSpec d = DomainSpec::benchmark();
    const StencilSystem sys = rasterize(d, 41, 41);
    // (-0.35, 0.35) is a lattice node inside the top-left circle.
    CHECK(!sys.at(13, 27).unknown);
    CHECK(sys.at(13, 27).value == -1.0);
    // Outer rim nodes carry the outer value.
    CHECK(!sys.at(40, 20).unknown);
    CHECK(sys.at(40, 20).value == 0.0);
    CHECK(sys.at(20, 20).unknown);

    const StencilSystem big = rasterize(d, 100, 100);
    CHECK(big.unknown_count <= 10'000);
    CHECK(big.unknown_count > 8'500);

    CHECK_THROWS_AS(rasterize(d, 4, 4), std::invalid_argument);

    DomainSpec tiny = DomainSpec::benchmark();
    tiny.inclusions[0].radius = 0.004;  // falls between nodes of a coarse grid
    CHECK_THROWS_AS(rasterize(tiny, 9, 9), std::invalid_argument);
}

TEST_CASE("solve_fd: constant boundary reproduces the constant") {
    DomainSpec d = DomainSpec::benchmark();
    const double c = 0.37;
    d.outer_boundary_value = c;
    d.inclusions[0].boundary_value = c;
    d.inclusions[1].boundary_value = c;
    SdeParams p;
    p.alpha = 0.5;
    const FieldGrid g = solve_fd(rasterize(d, 41, 41), p, 1e-10, 100'000);
    for (const auto& cell : g.cells)
        if (cell.cls == CellClass::Solved) CHECK(cell.mean == doctest::Approx(c).epsilon(1e-8));
}

TEST_CASE("solve_fd: benchmark center, maximum principle, residual certificate") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    const StencilSystem sys = rasterize(d, 120, 120);
    const FieldGrid g = solve_fd(sys, p, 1e-8, 100'000);

    CHECK(std::abs(bilinear_at(g, 0.0, 0.0)) <= 1e-3);
    for (const auto& cell : g.cells) {
        if (cell.cls == CellClass::Solved) {
            CHECK(cell.mean >= -1.0);
            CHECK(cell.mean <= 1.0);
        }
    }
    CHECK(fd_relative_residual(sys, p, g) <= 1e-8);
}

TEST_CASE("solve_fd: drift oracle exp(-omega x / alpha)") {
    // alpha u'' + omega u' = 0 has u = (exp(-w x) - exp(w)) / (exp(-w) - exp(w))
    // with w = omega/alpha; imposing it on the square boundary keeps the 2-D
    // solution one-dimensional.
    const double alpha = 0.5, omega = 0.4;
    const double w = omega / alpha;
    auto exact = [&](double x) {
        return (std::exp(-w * x) - std::exp(w)) / (std::exp(-w) - std::exp(w));
    };
    DomainSpec d;  // plain square
    d.outer_value_fn = [&](Point2 q) { return exact(q.x); };
    SdeParams p;
    p.alpha = alpha;
    p.omega_x = omega;
    const FieldGrid g = solve_fd(rasterize(d, 101, 101), p, 1e-10, 200'000);
    CHECK(std::abs(bilinear_at(g, 0.0, 0.0) - exact(0.0)) <= 1e-3);
    CHECK(std::abs(bilinear_at(g, 0.5, -0.3) - exact(0.5)) <= 1e-3);
}

TEST_CASE("solve_fd: drift oracle along y") {
    const double alpha = 0.5, omega = 0.4;
    const double w = omega / alpha;
    auto exact = [&](double y) {
        return (std::exp(-w * y) - std::exp(w)) / (std::exp(-w) - std::exp(w));
    };
    DomainSpec d;
    d.outer_value_fn = [&](Point2 q) { return exact(q.y); };
    SdeParams p;
    p.alpha = alpha;
    p.omega_y = omega;
    const FieldGrid g = solve_fd(rasterize(d, 101, 101), p, 1e-10, 200'000);
    CHECK(std::abs(bilinear_at(g, 0.0, 0.0) - exact(0.0)) <= 1e-3);
    CHECK(std::abs(bilinear_at(g, -0.3, 0.5) - exact(0.5)) <= 1e-3);
}

TEST_CASE("solve_fd: absorption oracle cosh(kx)/cosh(k)") {
    // alpha u'' = sigma u with u(+-1) = 1: u = cosh(kx)/cosh(k), k = sqrt(sigma/alpha).
    const double alpha = 0.5, sigma = 1.0;
    const double k = std::sqrt(sigma / alpha);
    auto exact = [&](double x) { return std::cosh(k * x) / std::cosh(k); };
    DomainSpec d;
    d.outer_value_fn = [&](Point2 q) { return exact(q.x); };
    SdeParams p;
    p.alpha = alpha;
    p.sigma_abs = sigma;
    const FieldGrid g = solve_fd(rasterize(d, 101, 101), p, 1e-10, 200'000);
    CHECK(std::abs(bilinear_at(g, 0.0, 0.0) - exact(0.0)) <= 1e-3);
    CHECK(std::abs(bilinear_at(g, -0.5, 0.7) - exact(-0.5)) <= 1e-3);
}

TEST_CASE("solve_fd: source oracle via the torsion function") {
    // alpha lap(u) + f = 0, u = 0 on the square boundary: u = (f/alpha) phi.
    SdeParams p;
    p.alpha = 0.5;
    p.source_f = 0.8;
    DomainSpec d;
    const FieldGrid g = solve_fd(rasterize(d, 121, 121), p, 1e-10, 200'000);
    const double expect = p.source_f / p.alpha * torsion_center();
    CHECK(std::abs(bilinear_at(g, 0.0, 0.0) - expect) <= 2e-3);
}

TEST_CASE("solve_fd: errors") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    const StencilSystem sys = rasterize(d, 60, 60);
    CHECK_THROWS_AS(solve_fd(sys, p, 1e-8, 1), std::runtime_error);  // no convergence
    CHECK_THROWS_AS(solve_fd(sys, p, 0.0, 100), std::invalid_argument);

    SdeParams fast = p;
    fast.omega_x = 50.0;  // grid Peclet > 1 at this resolution
    CHECK_THROWS_AS(solve_fd(sys, fast, 1e-8, 100), std::invalid_argument);

    SdeParams degenerate = p;
    degenerate.alpha = 0.0;
    CHECK_THROWS_AS(solve_fd(sys, degenerate, 1e-8, 100), std::invalid_argument);
}

TEST_CASE("fitted arms reproduce the linear disk harmonic exactly") {
    // u = r cos(theta) = x is linear, so the cut-arm stencil with rim values
    // has zero truncation error; only solver tolerance remains.
    const DomainSpec disk =
        unit_disk_with([](Point2 q) { return q.x / std::hypot(q.x, q.y); });
    SdeParams p;
    p.alpha = 1.0;
    const FieldGrid g =
        solve_fd(rasterize(disk, 65, 65, BoundaryTreatment::FittedArms), p, 1e-11, 200'000);
    double emax = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.at(i, j).cls == CellClass::Solved)
                emax = std::max(emax, std::abs(g.at(i, j).mean - g.node_x(i)));
    CHECK(emax <= 1e-6);
}

TEST_CASE("mesh refinement: second order on the curved disk harmonic") {
    // u = Re(z^4) has non-vanishing fourth derivatives, so the truncation
    // term is active and halving h should cut the error by about four.
    auto exact = [](double x, double y) {
        return x * x * x * x - 6.0 * x * x * y * y + y * y * y * y;
    };
    const DomainSpec disk = unit_disk_with([&](Point2 q) {
        const double r2 = q.x * q.x + q.y * q.y;
        return exact(q.x, q.y) / (r2 * r2);
    });
    SdeParams p;
    p.alpha = 1.0;

    double err[3];
    const int sizes[3] = {33, 65, 129};
    for (int s = 0; s < 3; ++s) {
        const FieldGrid g = solve_fd(
            rasterize(disk, sizes[s], sizes[s], BoundaryTreatment::FittedArms), p, 1e-11,
            400'000);
        double emax = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.at(i, j).cls == CellClass::Solved)
                    emax = std::max(emax,
                                    std::abs(g.at(i, j).mean - exact(g.node_x(i), g.node_y(j))));
        err[s] = emax;
    }
    const double order1 = std::log2(err[0] / err[1]);
    const double order2 = std::log2(err[1] / err[2]);
    CHECK(order1 >= 1.6);
    CHECK(order1 <= 2.4);
    CHECK(order2 >= 1.6);
    CHECK(order2 <= 2.4);
}

TEST_CASE("compare: identity, symmetry, shape mismatch") {
    DomainSpec d;
    SdeParams p;
    p.alpha = 0.5;
    d.outer_value_fn = [](Point2 q) { return 0.25 * q.x - 0.1 * q.y; };
    const FieldGrid a = solve_fd(rasterize(d, 33, 33), p, 1e-9, 100'000);

    const ErrorStats self = compare(a, a);
    CHECK(self.max_abs == 0.0);
    CHECK(self.mean_abs == 0.0);
    CHECK(self.count > 0);

    DomainSpec d2;
    d2.outer_value_fn = [](Point2 q) { return 0.2 * q.y; };
    const FieldGrid b = solve_fd(rasterize(d2, 33, 33), p, 1e-9, 100'000);
    CHECK(compare(a, b).max_abs == doctest::Approx(compare(b, a).max_abs).epsilon(1e-15));

    const FieldGrid c = solve_fd(rasterize(d2, 17, 17), p, 1e-9, 100'000);
    CHECK_THROWS_AS(compare(a, c), std::invalid_argument);

    DomainSpec small = d2;
    small.outer_half_width = 0.5;
    const FieldGrid e = solve_fd(rasterize(small, 33, 33), p, 1e-9, 100'000);
    CHECK_THROWS_AS(compare(a, e), std::invalid_argument);  // same shape, other extent
}

TEST_CASE("resample_bilinear reproduces bilinear fields") {
    FieldGrid src = FieldGrid::make(11, 11, 1.0);
    for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 11; ++i)
            src.at(i, j) = {CellClass::Solved, src.node_x(i) + 2.0 * src.node_y(j), 0.0, 1};
    const FieldGrid out = resample_bilinear(src, 7, 7);
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 7; ++i) {
            CHECK(out.at(i, j).cls == CellClass::Solved);
            CHECK(out.at(i, j).mean ==
                  doctest::Approx(out.node_x(i) + 2.0 * out.node_y(j)).epsilon(1e-12));
        }
}

TEST_SUITE_END();
