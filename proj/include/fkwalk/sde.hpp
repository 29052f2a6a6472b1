// Single-realization Euler-Maruyama diffusion to boundary exit and the
// exponential-weight payoff used to estimate the PDE solution.
#pragma once

#include <cstdint>
#include <vector>

#include "fkwalk/geometry.hpp"
#include "fkwalk/machine.hpp"

namespace fkwalk {

// Coefficients of alpha*lap(u) + omega.grad(u) - sigma*u + f = 0.
// The walk dX = omega*dt + beta*dW has generator alpha*lap + omega.grad
// exactly when beta = sqrt(2*alpha); this convention is fixed here and
// everything downstream depends on it.
struct SdeParams {
    double alpha = 0.5;      // diffusion coefficient
    double omega_x = 0.0;    // drift
    double omega_y = 0.0;
    double sigma_abs = 0.0;  // absorption; yields the exp(-sigma*tau) weight
    double source_f = 0.0;   // constant source term

    double beta() const;  // sqrt(2*alpha)
    // alpha = 0 (drift-only) is accepted for degenerate test walks.
    void validate() const;
};

enum class ExitMode { Naive, Interpolated };

struct WalkConfig {
    double dt = 1e-4;
    long max_steps = 1'000'000;
    ExitMode exit_mode = ExitMode::Interpolated;

    void validate() const;
};

enum class WalkCause { HitBoundary, Overload, MaxSteps };

struct WalkOutcome {
    Point2 exit_point;           // readout-quantized
    double tau = 0.0;            // exit time
    WalkCause cause = WalkCause::MaxSteps;
    int region = kOuterRegion;   // hit region; kLookupRegion for table exits
    double boundary_g = 0.0;     // boundary value observed at the exit
    double source_integral = 0.0;  // accumulated exp(-sigma*t)*f*dt
    long steps_taken = 0;
};

// Runs one walk from start (which must classify Interior) until a boundary
// hit, an overload, or the step budget. Overload is checked first on every
// step endpoint, matching a machine that halts on range overflow before the
// boundary detector is read.
WalkOutcome run_walk(const DomainSpec& domain, const SdeParams& params,
                     const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                     NoiseSource& noise);

// Same walk driven by the table-lookup oracle as the sole boundary
// detector: the chi flag halts the walk and the decoded word supplies the
// boundary value. Exits are inherently step-end (naive) events.
WalkOutcome run_walk_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                         const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                         NoiseSource& noise);

// exp(-sigma*tau)*g + source_integral. Overload walks take the outer
// boundary value; table exits use the decoded value stored in the outcome.
// Throws on MaxSteps outcomes (censoring policy is the caller's).
double payoff(const WalkOutcome& outcome, const DomainSpec& domain, const SdeParams& params);

struct ExitTimeRow {
    double dt = 0.0;
    double mean_tau_naive = 0.0;
    double mean_tau_interp = 0.0;
    double stderr_naive = 0.0;
    double stderr_interp = 0.0;
};

// For each dt, runs n_walks walk pairs on identical noise streams, one per
// exit mode, and reports mean exit times with standard errors. dt_list must
// be strictly decreasing with at least two entries; n_walks >= 1000.
std::vector<ExitTimeRow> exit_time_study(const DomainSpec& domain, const SdeParams& params,
                                         const MachineModel& machine, Point2 start,
                                         const std::vector<double>& dt_list, long n_walks,
                                         std::uint64_t seed);

}  // namespace fkwalk
