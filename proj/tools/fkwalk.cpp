// fkwalk: grid-free Monte Carlo / random walk solver for stationary
// elliptic boundary-value problems, with a finite-difference reference
// solver and lookup-table boundary tooling.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "fkwalk/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset;
    int nx = 0, ny = 0;
    long walks = 0;
    double dt = 0.0;
    long seed = -1;
    int workers = -1;
    double alpha = 0.0, omega_x = 0.0, omega_y = 0.0, sigma = 0.0, source = 0.0;
    std::string exit_mode;
    std::string out;
    std::string range;
    bool image = false;

    CLI::Option* opt[16] = {};
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    f.opt[0] = cmd->add_option("--config", f.config_path, "Config file (key = value sections)");
    f.opt[1] = cmd->add_option("--preset", f.preset, "Domain preset (benchmark)");
    f.opt[2] = cmd->add_option("--nx", f.nx, "Grid nodes in x");
    f.opt[3] = cmd->add_option("--ny", f.ny, "Grid nodes in y");
    f.opt[4] = cmd->add_option("--walks", f.walks, "Walks per grid point");
    f.opt[5] = cmd->add_option("--dt", f.dt, "Time step");
    f.opt[6] = cmd->add_option("--seed", f.seed, "Base seed");
    f.opt[7] = cmd->add_option("--workers", f.workers, "Worker threads (0 = auto)");
    f.opt[8] = cmd->add_option("--alpha", f.alpha, "Diffusion coefficient");
    f.opt[9] = cmd->add_option("--omega-x", f.omega_x, "Drift, x component");
    f.opt[10] = cmd->add_option("--omega-y", f.omega_y, "Drift, y component");
    f.opt[11] = cmd->add_option("--sigma", f.sigma, "Absorption coefficient");
    f.opt[12] = cmd->add_option("--source", f.source, "Constant source term");
    f.opt[13] = cmd->add_option("--exit-mode", f.exit_mode, "naive or interp")
                    ->check(CLI::IsMember({"naive", "interp"}));
    f.opt[14] = cmd->add_option("--out", f.out, "Output prefix");
    f.opt[15] = cmd->add_option("--range", f.range, "Render range lo:hi");
    cmd->add_flag("--image", f.image, "Also write a PGM image");
}

// Config file first, explicit flags second, so flags win.
fkwalk::RunConfig build_config(const CommonFlags& f) {
    fkwalk::RunConfig c;
    if (f.opt[0]->count()) fkwalk::apply_config_file(f.config_path, c);
    if (f.opt[1]->count()) c.preset = f.preset;
    if (f.opt[2]->count()) c.nx = f.nx;
    if (f.opt[3]->count()) c.ny = f.ny;
    if (f.opt[4]->count()) c.walks = f.walks;
    if (f.opt[5]->count()) c.walk.dt = f.dt;
    if (f.opt[6]->count()) c.seed = static_cast<std::uint64_t>(f.seed);
    if (f.opt[7]->count()) c.workers = f.workers;
    if (f.opt[8]->count()) c.params.alpha = f.alpha;
    if (f.opt[9]->count()) c.params.omega_x = f.omega_x;
    if (f.opt[10]->count()) c.params.omega_y = f.omega_y;
    if (f.opt[11]->count()) c.params.sigma_abs = f.sigma;
    if (f.opt[12]->count()) c.params.source_f = f.source;
    if (f.opt[13]->count())
        c.walk.exit_mode =
            f.exit_mode == "naive" ? fkwalk::ExitMode::Naive : fkwalk::ExitMode::Interpolated;
    if (f.opt[14]->count()) c.out_prefix = f.out;
    if (f.opt[15]->count()) {
        const auto colon = f.range.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--range", "expected lo:hi");
        try {
            c.range_lo = std::stod(f.range.substr(0, colon));
            c.range_hi = std::stod(f.range.substr(colon + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--range", "expected numbers lo:hi");
        }
        if (!(c.range_lo < c.range_hi)) throw CLI::ValidationError("--range", "lo must be < hi");
    }
    if (f.image) c.image = true;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo / random walk PDE solver with FD reference"};
    app.require_subcommand(1);

    CommonFlags f_mc, f_fd, f_bias, f_mklut, f_lut;

    CLI::App* mc = app.add_subcommand("solve-mc", "Solve the field by random walks");
    add_common(mc, f_mc);

    CLI::App* fd = app.add_subcommand("solve-fd", "Solve the field by finite differences");
    add_common(fd, f_fd);

    CLI::App* cmp = app.add_subcommand("compare", "Compare two field CSVs");
    std::string cmp_a, cmp_b, cmp_out = "compare", cmp_range;
    cmp->add_option("field_a", cmp_a, "First field CSV")->required();
    cmp->add_option("field_b", cmp_b, "Second field CSV")->required();
    cmp->add_option("--out", cmp_out, "Output prefix");
    cmp->add_option("--range", cmp_range, "Error image range lo:hi (default -0.15:0.15)");

    CLI::App* bias = app.add_subcommand("bias-study", "Exit-time bias vs dt");
    add_common(bias, f_bias);
    std::vector<double> dts;
    double start_x = 0.9, start_y = 0.9;
    bias->add_option("--dts", dts, "Decreasing dt values")->required()->expected(2, 16)
        ->delimiter(',');
    bias->add_option("--start-x", start_x, "Walk start, x");
    bias->add_option("--start-y", start_y, "Walk start, y");

    CLI::App* mklut = app.add_subcommand("make-lut", "Write a boundary lookup table");
    add_common(mklut, f_mklut);
    int resolution = 256;
    std::string lut_out = "boundary.lut";
    mklut->add_option("--resolution", resolution, "Cells per axis (power of two)");
    mklut->add_option("--lut-out", lut_out, "Output table path");

    CLI::App* lutsolve = app.add_subcommand("lut-solve", "Solve using a lookup table oracle");
    add_common(lutsolve, f_lut);
    std::string lut_path;
    lutsolve->add_option("--lut", lut_path, "Lookup table path")->required();

    CLI::App* render = app.add_subcommand("render", "Render a field CSV to a PGM image");
    std::string render_csv, render_out, render_range;
    render->add_option("csv", render_csv, "Field CSV")->required();
    render->add_option("image", render_out, "Output PGM path")->required();
    render->add_option("--range", render_range, "Value range lo:hi (default -1:1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (mc->parsed()) return fkwalk::cmd_solve_mc(build_config(f_mc));
        if (fd->parsed()) return fkwalk::cmd_solve_fd(build_config(f_fd));
        if (cmp->parsed()) {
            double lo = -0.15, hi = 0.15;
            if (!cmp_range.empty()) {
                const auto colon = cmp_range.find(':');
                if (colon == std::string::npos) {
                    std::fprintf(stderr, "error: --range expects lo:hi\n");
                    return 2;
                }
                lo = std::stod(cmp_range.substr(0, colon));
                hi = std::stod(cmp_range.substr(colon + 1));
            }
            return fkwalk::cmd_compare(cmp_a, cmp_b, cmp_out, lo, hi);
        }
        if (bias->parsed())
            return fkwalk::cmd_bias_study(build_config(f_bias), dts, {start_x, start_y});
        if (mklut->parsed()) return fkwalk::cmd_make_lut(build_config(f_mklut), resolution, lut_out);
        if (lutsolve->parsed()) return fkwalk::cmd_lut_solve(build_config(f_lut), lut_path);
        if (render->parsed()) {
            double lo = -1.0, hi = 1.0;
            if (!render_range.empty()) {
                const auto colon = render_range.find(':');
                if (colon == std::string::npos) {
                    std::fprintf(stderr, "error: --range expects lo:hi\n");
                    return 2;
                }
                lo = std::stod(render_range.substr(0, colon));
                hi = std::stod(render_range.substr(colon + 1));
            }
            return fkwalk::cmd_render(render_csv, render_out, lo, hi);
        }
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
