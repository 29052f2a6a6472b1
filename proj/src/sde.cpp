#include "fkwalk/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fkwalk/estimator.hpp"

namespace fkwalk {

double SdeParams::beta() const { return std::sqrt(2.0 * alpha); }

void SdeParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("SdeParams: alpha must be >= 0");
    if (!(sigma_abs >= 0.0) || !std::isfinite(sigma_abs))
        throw std::invalid_argument("SdeParams: sigma_abs must be >= 0");
    if (!std::isfinite(omega_x) || !std::isfinite(omega_y) || !std::isfinite(source_f))
        throw std::invalid_argument("SdeParams: coefficients must be finite");
}

void WalkConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("WalkConfig: dt must be > 0");
    if (max_steps <= 0) throw std::invalid_argument("WalkConfig: max_steps must be > 0");
}

namespace {

struct StepState {
    Point2 x;
    double source = 0.0;
    double decay = 1.0;       // exp(-sigma * k * dt), updated multiplicatively
    double decay_factor = 1.0;
};

// Shared walk driver. ExitFn(x_prev, x_next) returns true and fills
// (tau_frac, region, g) when the step left the domain.
template <typename ExitFn>
WalkOutcome drive_walk(const SdeParams& params, const MachineModel& machine,
                       const WalkConfig& cfg, Point2 start, NoiseSource& noise,
                       double outer_value, ExitFn&& exit_fn) {
    params.validate();
    cfg.validate();
    machine.validate();

    const double beta = params.beta();
    const double drift_x = params.omega_x * cfg.dt;
    const double drift_y = params.omega_y * cfg.dt;
    const bool with_source = params.source_f != 0.0;

    StepState st;
    st.x = start;
    st.decay_factor = std::exp(-params.sigma_abs * cfg.dt);

    WalkOutcome out;
    for (long k = 0; k < cfg.max_steps; ++k) {
        double slab = 0.0;
        if (with_source) {
            slab = st.decay * params.source_f * cfg.dt;
            st.source += slab;
        }

        const auto [dwx, dwy] = noise.sample_increment(cfg.dt);
        Point2 next{st.x.x + drift_x + beta * dwx, st.x.y + drift_y + beta * dwy};
        if (!finite(next)) throw std::runtime_error("run_walk: non-finite state");

        if (check_overload(machine, next)) {
            Point2 clamped{std::clamp(next.x, -machine.range_limit, machine.range_limit),
                           std::clamp(next.y, -machine.range_limit, machine.range_limit)};
            out.exit_point = {quantize_readout(machine, clamped.x),
                              quantize_readout(machine, clamped.y)};
            out.tau = (k + 1) * cfg.dt;
            out.cause = WalkCause::Overload;
            out.region = kOuterRegion;
            out.boundary_g = outer_value;
            out.source_integral = st.source;
            out.steps_taken = k + 1;
            return out;
        }

        double frac = 1.0;
        int region = kOuterRegion;
        double g = 0.0;
        if (exit_fn(st.x, next, frac, region, g)) {
            if (with_source && frac < 1.0) st.source -= (1.0 - frac) * slab;
            out.tau = k * cfg.dt + frac * cfg.dt;
            out.cause = WalkCause::HitBoundary;
            out.region = region;
            out.boundary_g = g;
            out.source_integral = st.source;
            out.steps_taken = k + 1;
            return out;
        }

        st.x = next;
        st.decay *= st.decay_factor;
    }

    out.exit_point = {quantize_readout(machine, st.x.x), quantize_readout(machine, st.x.y)};
    out.tau = cfg.max_steps * cfg.dt;
    out.cause = WalkCause::MaxSteps;
    out.region = kOuterRegion;
    out.boundary_g = 0.0;
    out.source_integral = st.source;
    out.steps_taken = cfg.max_steps;
    return out;
}

}  // namespace

WalkOutcome run_walk(const DomainSpec& domain, const SdeParams& params,
                     const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                     NoiseSource& noise) {
    if (!classify(domain, start).interior())
        throw std::invalid_argument("run_walk: start point must be interior");

    Point2 exit_raw{};
    auto exit_fn = [&](const Point2& prev, const Point2& next, double& frac, int& region,
                       double& g) {
        if (cfg.exit_mode == ExitMode::Interpolated) {
            if (auto hit = segment_exit(domain, prev, next)) {
                frac = hit->fraction;
                region = hit->region;
                g = boundary_value_at(domain, hit->region, hit->point);
                exit_raw = hit->point;
                return true;
            }
            return false;
        }
        const RegionClass rc = classify(domain, next);
        if (rc.interior()) return false;
        frac = 1.0;
        // Points past the outer shape count as outer-boundary hits.
        region = rc.kind == RegionClass::Kind::Boundary ? rc.region : kOuterRegion;
        g = rc.kind == RegionClass::Kind::Boundary
                ? rc.value
                : boundary_value_at(domain, kOuterRegion, next);
        exit_raw = next;
        return true;
    };

    WalkOutcome out = drive_walk(params, machine, cfg, start, noise,
                                 domain.outer_boundary_value, exit_fn);
    if (out.cause == WalkCause::HitBoundary) {
        out.exit_point = {quantize_readout(machine, exit_raw.x),
                          quantize_readout(machine, exit_raw.y)};
    }
    return out;
}

WalkOutcome run_walk_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                         const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                         NoiseSource& noise) {
    if (lookup_query(oracle, start).chi)
        throw std::invalid_argument("run_walk_lut: start point must have chi = 0");

    Point2 exit_raw{};
    auto exit_fn = [&](const Point2&, const Point2& next, double& frac, int& region,
                       double& g) {
        const LookupSample s = lookup_query(oracle, next);
        if (!s.chi) return false;
        frac = 1.0;
        region = kLookupRegion;
        g = s.value;
        exit_raw = next;
        return true;
    };

    WalkOutcome out = drive_walk(params, machine, cfg, start, noise, 0.0, exit_fn);
    if (out.cause == WalkCause::HitBoundary) {
        out.exit_point = {quantize_readout(machine, exit_raw.x),
                          quantize_readout(machine, exit_raw.y)};
    }
    return out;
}

double payoff(const WalkOutcome& outcome, const DomainSpec& domain, const SdeParams& params) {
    if (outcome.cause == WalkCause::MaxSteps)
        throw std::runtime_error("payoff: walk was censored by the step budget");
    double g;
    if (outcome.cause == WalkCause::Overload) {
        g = domain.outer_boundary_value;
    } else if (outcome.region == kLookupRegion) {
        g = outcome.boundary_g;
    } else {
        g = boundary_value_at(domain, outcome.region, outcome.exit_point);
    }
    return std::exp(-params.sigma_abs * outcome.tau) * g + outcome.source_integral;
}

std::vector<ExitTimeRow> exit_time_study(const DomainSpec& domain, const SdeParams& params,
                                         const MachineModel& machine, Point2 start,
                                         const std::vector<double>& dt_list, long n_walks,
                                         std::uint64_t seed) {
    if (dt_list.size() < 2)
        throw std::invalid_argument("exit_time_study: need at least two dt values");
    for (std::size_t i = 1; i < dt_list.size(); ++i)
        if (!(dt_list[i] < dt_list[i - 1]))
            throw std::invalid_argument("exit_time_study: dt_list must be strictly decreasing");
    if (n_walks < 1000)
        throw std::invalid_argument("exit_time_study: n_walks must be >= 1000");

    std::vector<ExitTimeRow> rows;
    rows.reserve(dt_list.size());
    for (std::size_t di = 0; di < dt_list.size(); ++di) {
        WalkConfig cfg;
        cfg.dt = dt_list[di];
        cfg.max_steps = 10'000'000;

        PointEstimate naive, interp;
        for (long j = 0; j < n_walks; ++j) {
            const std::uint64_t walk_seed = seed_for(seed, di, 0, static_cast<std::uint64_t>(j));
            // Identical stream for both modes: the interpolated exit lies on
            // the same trajectory, at or before the naive one.
            cfg.exit_mode = ExitMode::Naive;
            NoiseSource src_n = NoiseSource::ideal(walk_seed);
            const WalkOutcome on = run_walk(domain, params, machine, cfg, start, src_n);

            cfg.exit_mode = ExitMode::Interpolated;
            NoiseSource src_i = NoiseSource::ideal(walk_seed);
            const WalkOutcome oi = run_walk(domain, params, machine, cfg, start, src_i);

            if (on.cause == WalkCause::MaxSteps || oi.cause == WalkCause::MaxSteps) continue;
            naive.accumulate(on.tau);
            interp.accumulate(oi.tau);
        }
        rows.push_back({cfg.dt, naive.mean, interp.mean, naive.standard_error(),
                        interp.standard_error()});
    }
    return rows;
}

}  // namespace fkwalk
