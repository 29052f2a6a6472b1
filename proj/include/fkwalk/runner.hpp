// Run configuration, config-file parsing, output writers, and the
// implementations behind the CLI subcommands. Commands return process exit
// codes: 0 success, 2 configuration error, 3 numerical failure.
#pragma once

#include <string>
#include <vector>

#include "fkwalk/fdref.hpp"

namespace fkwalk {

struct RunConfig {
    // [domain]
    std::string preset;  // "benchmark" or empty for explicit geometry
    double half_width = 1.0;
    double outer_value = 0.0;
    std::vector<Inclusion> circles;

    // [sde]
    SdeParams params;

    // [walk]
    WalkConfig walk;

    // [machine]
    MachineModel machine;

    // [fd]
    double fd_tol = 1e-8;
    long fd_max_iter = 200'000;

    // [grid]
    int nx = 50;
    int ny = 50;
    double extent = 0.0;  // 0 = domain half-width

    // [run]
    long walks = 200;
    std::uint64_t seed = 1;
    int workers = -1;  // -1 unset (env/auto), 0 auto, >0 explicit

    // [output]
    std::string out_prefix = "out";
    double range_lo = -1.0;
    double range_hi = 1.0;
    bool image = false;

    DomainSpec domain() const;   // throws std::invalid_argument on bad geometry
    int resolve_workers() const; // applies FKWALK_WORKERS when unset
    double grid_extent() const;
};

// Line-oriented "key = value" file with [section] headers and # comments.
// Unknown sections or keys are configuration errors.
void apply_config_file(const std::string& path, RunConfig& config);

// 8-bit binary graymap: u maps linearly from [lo, hi] to [0, 255] (round
// half up, clamped); Invalid cells map to 0; image top is y = +extent.
void write_pgm(const FieldGrid& grid, const std::string& path, double lo, double hi);

int cmd_solve_mc(const RunConfig& config);
int cmd_solve_fd(const RunConfig& config);
int cmd_compare(const std::string& field_a_path, const std::string& field_b_path,
                const std::string& out_prefix, double range_lo = -0.15,
                double range_hi = 0.15);
int cmd_bias_study(const RunConfig& config, const std::vector<double>& dt_list,
                   Point2 start);
int cmd_make_lut(const RunConfig& config, int resolution, const std::string& out_path);
int cmd_lut_solve(const RunConfig& config, const std::string& lut_path);
int cmd_render(const std::string& field_csv, const std::string& out_image, double range_lo,
               double range_hi);

}  // namespace fkwalk
