#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "fkwalk/estimator.hpp"

using namespace fkwalk;

namespace {

MachineModel exact_machine() {
    MachineModel m;
    m.readout_quantum = 0.0;
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("sde");

TEST_CASE("beta follows the generator correspondence") {
    SdeParams p;
    p.alpha = 0.5;
    CHECK(p.beta() == doctest::Approx(1.0).epsilon(1e-15));
    p.alpha = 2.0;
    CHECK(p.beta() * p.beta() == doctest::Approx(2.0 * p.alpha).epsilon(1e-15));
}

TEST_CASE("benchmark walk terminates on a boundary or overload") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    MachineModel m;
    WalkConfig cfg;
    cfg.dt = 1e-4;
    NoiseSource src = NoiseSource::ideal(3);
    const WalkOutcome out = run_walk(d, p, m, cfg, {0.9, 0.9}, src);
    CHECK((out.cause == WalkCause::HitBoundary || out.cause == WalkCause::Overload));
    CHECK(out.tau > 0.0);
    CHECK(out.tau <= cfg.dt * cfg.max_steps);
}

TEST_CASE("start point must be interior") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    MachineModel m;
    WalkConfig cfg;
    NoiseSource src = NoiseSource::ideal(3);
    CHECK_THROWS_AS(run_walk(d, p, m, cfg, {1.5, 0.0}, src), std::invalid_argument);
    CHECK_THROWS_AS(run_walk(d, p, m, cfg, {-0.35, 0.35}, src), std::invalid_argument);
}

TEST_CASE("drift-only walk crosses in the analytic transit time") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.0;  // beta = 0
    p.omega_x = 1.0;
    MachineModel m = exact_machine();
    WalkConfig cfg;
    cfg.dt = 1e-3;

    cfg.exit_mode = ExitMode::Naive;
    NoiseSource src = NoiseSource::ideal(1);
    WalkOutcome out = run_walk(d, p, m, cfg, {0, 0}, src);
    // The square edge coincides with the range limit, so the crossing step
    // lands on or beyond x = 1 and halts either way.
    CHECK(out.tau == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(out.exit_point.x == doctest::Approx(1.0).epsilon(1e-9));

    cfg.exit_mode = ExitMode::Interpolated;
    NoiseSource src2 = NoiseSource::ideal(1);
    out = run_walk(d, p, m, cfg, {0, 0}, src2);
    if (out.cause == WalkCause::HitBoundary) {
        CHECK(out.tau == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(out.exit_point.x == 1.0);
    } else {
        CHECK(out.tau == doctest::Approx(1.0).epsilon(2e-3));
    }
}

TEST_CASE("interpolated exit lands on the inclusion rim") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.0;
    p.omega_y = 1.0;  // straight up into the top-left circle
    MachineModel m = exact_machine();
    WalkConfig cfg;
    cfg.dt = 1e-3;
    cfg.exit_mode = ExitMode::Interpolated;
    NoiseSource src = NoiseSource::ideal(1);
    const WalkOutcome out = run_walk(d, p, m, cfg, {-0.35, -0.5}, src);
    CHECK(out.cause == WalkCause::HitBoundary);
    CHECK(out.region == 0);
    CHECK(out.boundary_g == -1.0);
    CHECK(out.tau == doctest::Approx(0.6).epsilon(1e-9));  // from y=-0.5 to rim y=0.10
    CHECK(out.exit_point.y == doctest::Approx(0.10).epsilon(1e-9));
}

TEST_CASE("walks started near a circle mostly exit on it") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    MachineModel m;
    WalkConfig cfg;
    cfg.dt = 2e-5;
    const long n = 30'000;
    long hit_plus = 0, hit_other = 0;
    for (long j = 0; j < n; ++j) {
        NoiseSource src = NoiseSource::ideal(seed_for(17, 0, 0, j));
        // The rim below the top-left circle center sits at y = 0.10; start
        // one hundredth below it, inside the domain.
        const WalkOutcome out = run_walk(d, p, m, cfg, {-0.35, 0.09}, src);
        REQUIRE(out.cause != WalkCause::MaxSteps);
        if (out.cause == WalkCause::HitBoundary && out.region == 0)
            ++hit_plus;
        else
            ++hit_other;
    }
    CHECK(hit_plus > hit_other);
    CHECK(static_cast<double>(hit_plus) / n > 0.75);
}

TEST_CASE("payoff: frozen examples") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;

    WalkOutcome out;
    out.cause = WalkCause::HitBoundary;
    out.region = 1;  // lower-right circle, value +1
    out.exit_point = {0.35, -0.10};
    out.boundary_g = 1.0;
    out.tau = 0.123;
    CHECK(payoff(out, d, p) == 1.0);  // sigma = 0

    out.cause = WalkCause::Overload;
    CHECK(payoff(out, d, p) == 0.0);  // outer value

    p.sigma_abs = 1.0;
    out.cause = WalkCause::HitBoundary;
    out.tau = 0.0;
    CHECK(payoff(out, d, p) == 1.0);  // e^0 * g

    out.cause = WalkCause::MaxSteps;
    CHECK_THROWS(payoff(out, d, p));
}

TEST_CASE("payoff bound and seed determinism") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    p.sigma_abs = 0.7;
    MachineModel m;
    WalkConfig cfg;
    cfg.dt = 2e-4;
    for (int k = 0; k < 200; ++k) {
        NoiseSource src = NoiseSource::ideal(seed_for(5, 1, 2, k));
        const WalkOutcome out = run_walk(d, p, m, cfg, {0.0, -0.3}, src);
        if (out.cause == WalkCause::MaxSteps) continue;
        const double v = payoff(out, d, p);
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);

        NoiseSource src2 = NoiseSource::ideal(seed_for(5, 1, 2, k));
        const WalkOutcome out2 = run_walk(d, p, m, cfg, {0.0, -0.3}, src2);
        CHECK(out.tau == out2.tau);
        CHECK(out.exit_point.x == out2.exit_point.x);
        CHECK(out.exit_point.y == out2.exit_point.y);
        CHECK(out.region == out2.region);
        CHECK(out.steps_taken == out2.steps_taken);
    }
}

TEST_CASE("source integral equals f * tau when sigma = 0") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    p.source_f = 0.8;
    MachineModel m;
    for (ExitMode mode : {ExitMode::Naive, ExitMode::Interpolated}) {
        WalkConfig cfg;
        cfg.dt = 1e-4;
        cfg.exit_mode = mode;
        NoiseSource src = NoiseSource::ideal(21);
        const WalkOutcome out = run_walk(d, p, m, cfg, {0.1, 0.1}, src);
        REQUIRE(out.cause != WalkCause::MaxSteps);
        CHECK(out.source_integral == doctest::Approx(p.source_f * out.tau).epsilon(1e-10));
    }

    SdeParams zero;
    zero.alpha = 0.5;
    WalkConfig cfg;
    NoiseSource src = NoiseSource::ideal(21);
    const WalkOutcome out = run_walk(d, zero, m, cfg, {0.1, 0.1}, src);
    CHECK(out.source_integral == 0.0);
}

TEST_CASE("unit disk with g = 1: every payoff is exactly 1") {
    DomainSpec disk;
    disk.outer_shape = OuterShape::Disk;
    disk.outer_half_width = 1.0;
    disk.outer_boundary_value = 1.0;
    MachineModel m = exact_machine();
    m.overload_enabled = false;
    WalkConfig cfg;
    cfg.dt = 1e-3;
    for (double alpha : {0.25, 1.0}) {
        SdeParams p;
        p.alpha = alpha;
        const PointEstimate est = estimate_point(disk, p, m, cfg, {0.3, 0.2}, 500, 77, 0, 0);
        CHECK(est.n == 500);
        CHECK(est.n_censored == 0);
        CHECK(est.mean == 1.0);
        CHECK(est.standard_error() == 0.0);
    }
}

TEST_CASE("doubling alpha halves the mean exit time") {
    const DomainSpec d = DomainSpec::benchmark();
    MachineModel m;
    WalkConfig cfg;
    cfg.dt = 1e-4;
    const long n = 3000;

    auto mean_tau = [&](double alpha, PointEstimate& est) {
        SdeParams p;
        p.alpha = alpha;
        for (long j = 0; j < n; ++j) {
            NoiseSource src = NoiseSource::ideal(seed_for(31, 0, 0, j));
            const WalkOutcome out = run_walk(d, p, m, cfg, {0.5, 0.5}, src);
            REQUIRE(out.cause != WalkCause::MaxSteps);
            est.accumulate(out.tau);
        }
    };
    PointEstimate slow, fast;
    mean_tau(0.5, slow);
    mean_tau(1.0, fast);
    const double allowance = 3.0 * std::sqrt(slow.standard_error() * slow.standard_error() +
                                             4.0 * fast.standard_error() * fast.standard_error());
    CHECK(std::abs(slow.mean - 2.0 * fast.mean) <= allowance);
}

TEST_CASE("exit_time_study: ordering, bias decay, preconditions") {
    const DomainSpec d = DomainSpec::benchmark();
    SdeParams p;
    p.alpha = 0.5;
    MachineModel m;

    CHECK_THROWS_AS(exit_time_study(d, p, m, {0.9, 0.9}, {1e-4}, 2000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(exit_time_study(d, p, m, {0.9, 0.9}, {1e-4, 2e-4}, 2000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(exit_time_study(d, p, m, {0.9, 0.9}, {2e-4, 1e-4}, 100, 1),
                    std::invalid_argument);

    const auto rows = exit_time_study(d, p, m, {0.9, 0.9}, {8e-4, 4e-4, 2e-4}, 2000, 12);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_tau_naive >= rows[i].mean_tau_interp);
        if (i > 0) {
            const double allowance =
                2.0 * std::hypot(rows[i].stderr_naive, rows[i - 1].stderr_naive);
            CHECK(rows[i].mean_tau_naive <= rows[i - 1].mean_tau_naive + allowance);
        }
    }
}

TEST_CASE("exit_time_study: drift-only gap stays within one step") {
    // Deterministic path: the naive exit trails the crossing by < dt.
    DomainSpec square;  // plain unit square, no circles
    SdeParams p;
    p.alpha = 0.0;
    p.omega_x = 1.0;
    MachineModel m;
    const auto rows = exit_time_study(square, p, m, {0, 0}, {1e-3, 5e-4}, 1000, 4);
    for (const auto& r : rows) {
        const double gap = r.mean_tau_naive - r.mean_tau_interp;
        CHECK(gap >= 0.0);
        CHECK(gap <= r.dt + 1e-12);
    }
}

TEST_SUITE_END();
