// Aggregation of walk payoffs into point estimates and full solution
// fields, with order-independent per-walk seeding so results never depend
// on worker count or scheduling.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fkwalk/sde.hpp"

namespace fkwalk {

// Single-pass mean/variance accumulator (Welford), mergeable across tasks.
struct PointEstimate {
    double mean = 0.0;
    double m2 = 0.0;       // sum of squared deviations
    long n = 0;            // accepted samples
    long n_censored = 0;   // walks terminated by the step budget

    void accumulate(double sample);           // throws on non-finite input
    double standard_error() const;            // 0 for n < 2
};

// Exact pooled statistics, as if all samples went through one accumulator
// (up to floating-point reassociation).
PointEstimate merge(const PointEstimate& a, const PointEstimate& b);

// Avalanche mix of (base_seed, ix, iy, j); the per-walk stream seed.
std::uint64_t seed_for(std::uint64_t base_seed, std::uint64_t ix, std::uint64_t iy,
                       std::uint64_t j);

// n_walks walks from start with seeds seed_for(base_seed, ix, iy, j).
// Censored walks are counted but excluded from the estimate; throws
// std::runtime_error if every walk was censored.
PointEstimate estimate_point(const DomainSpec& domain, const SdeParams& params,
                             const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                             long n_walks, std::uint64_t base_seed, std::uint64_t ix,
                             std::uint64_t iy);

// Same, but boundary detection and values come from the lookup table.
PointEstimate estimate_point_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                                 const MachineModel& machine, const WalkConfig& cfg,
                                 Point2 start, long n_walks, std::uint64_t base_seed,
                                 std::uint64_t ix, std::uint64_t iy);

enum class CellClass { Solved, FixedBoundary, Invalid };

struct FieldCell {
    CellClass cls = CellClass::Invalid;
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
};

// nx x ny nodes spanning [-extent, extent]^2 inclusively:
// x_i = -extent + 2*extent*i/(nx-1). Row-major with y outer.
struct FieldGrid {
    int nx = 0;
    int ny = 0;
    double extent = 1.0;
    std::vector<FieldCell> cells;

    static FieldGrid make(int nx, int ny, double extent);
    double node_x(int i) const;
    double node_y(int j) const;
    FieldCell& at(int i, int j);
    const FieldCell& at(int i, int j) const;
};

struct SolveStats {
    long walks = 0;      // executed walk realizations
    long censored = 0;
    long failed_cells = 0;
};

using ProgressFn = std::function<void(int rows_done, int rows_total)>;

// Estimates every interior node of the grid with n_walks walks each.
// Nodes on or inside a boundary become FixedBoundary(region value); nodes
// beyond the outer shape become Invalid. worker_count 0 picks the hardware
// concurrency. Output is a pure function of the inputs and base_seed.
FieldGrid solve_field(const DomainSpec& domain, const SdeParams& params,
                      const MachineModel& machine, const WalkConfig& cfg, int nx, int ny,
                      double extent, long n_walks, std::uint64_t base_seed, int worker_count,
                      SolveStats* stats = nullptr, const ProgressFn& progress = {});

// Lookup-driven variant: the chi flag is the sole boundary detector and the
// decoded table value the boundary datum (node classification included).
FieldGrid solve_field_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                          const MachineModel& machine, const WalkConfig& cfg, int nx, int ny,
                          double extent, long n_walks, std::uint64_t base_seed,
                          int worker_count, SolveStats* stats = nullptr,
                          const ProgressFn& progress = {});

// CSV: header "x,y,u,stderr,n,flag", one row per node, row-major, 12
// significant digits; flag in {solved, fixed, invalid}.
void write_field_csv(const FieldGrid& grid, std::ostream& out);
void write_field_csv(const FieldGrid& grid, const std::string& path);
FieldGrid read_field_csv(const std::string& path);  // throws on malformed input

}  // namespace fkwalk
