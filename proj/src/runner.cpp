#include "fkwalk/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fkwalk {

DomainSpec RunConfig::domain() const {
    DomainSpec d;
    if (preset == "benchmark") {
        if (!circles.empty())
            throw std::invalid_argument("config: preset and explicit circles are mutually exclusive");
        d = DomainSpec::benchmark();
    } else if (preset.empty()) {
        d.outer_half_width = half_width;
        d.outer_boundary_value = outer_value;
        d.inclusions = circles;
    } else {
        throw std::invalid_argument("config: unknown preset '" + preset + "'");
    }
    d.validate();
    return d;
}

int RunConfig::resolve_workers() const {
    if (workers >= 0) return workers;
    if (const char* env = std::getenv("FKWALK_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 0 && v <= 4096) return static_cast<int>(v);
        throw std::invalid_argument("FKWALK_WORKERS must be a small non-negative integer");
    }
    return 0;  // auto
}

double RunConfig::grid_extent() const {
    if (extent > 0.0) return extent;
    return preset == "benchmark" ? 1.0 : half_width;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad flag for " + key + ": '" + v + "'");
}

void parse_range(const std::string& v, double& lo, double& hi) {
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("config: range must be lo:hi, got '" + v + "'");
    lo = to_double("range", trim(v.substr(0, colon)));
    hi = to_double("range", trim(v.substr(colon + 1)));
    if (!(lo < hi)) throw std::invalid_argument("config: range lo must be < hi");
}

ExitMode parse_exit_mode(const std::string& v) {
    if (v == "naive") return ExitMode::Naive;
    if (v == "interp" || v == "interpolated") return ExitMode::Interpolated;
    throw std::invalid_argument("config: exit_mode must be naive or interp, got '" + v + "'");
}

void apply_key(RunConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string k = section.empty() ? key : section + "." + key;
    if (k == "domain.preset") {
        c.preset = value;
    } else if (k == "domain.half_width") {
        c.half_width = to_double(k, value);
    } else if (k == "domain.outer_value") {
        c.outer_value = to_double(k, value);
    } else if (k == "domain.circle") {
        std::istringstream iss(value);
        Inclusion inc;
        if (!(iss >> inc.center.x >> inc.center.y >> inc.radius >> inc.boundary_value) ||
            !(iss >> std::ws).eof())
            throw std::invalid_argument("config: circle wants 'cx cy r value', got '" + value +
                                        "'");
        c.circles.push_back(inc);
    } else if (k == "sde.alpha") {
        c.params.alpha = to_double(k, value);
    } else if (k == "sde.omega_x") {
        c.params.omega_x = to_double(k, value);
    } else if (k == "sde.omega_y") {
        c.params.omega_y = to_double(k, value);
    } else if (k == "sde.sigma") {
        c.params.sigma_abs = to_double(k, value);
    } else if (k == "sde.source") {
        c.params.source_f = to_double(k, value);
    } else if (k == "walk.dt") {
        c.walk.dt = to_double(k, value);
    } else if (k == "walk.max_steps") {
        c.walk.max_steps = to_long(k, value);
    } else if (k == "walk.exit_mode") {
        c.walk.exit_mode = parse_exit_mode(value);
    } else if (k == "machine.range_limit") {
        c.machine.range_limit = to_double(k, value);
    } else if (k == "machine.readout_quantum") {
        c.machine.readout_quantum = to_double(k, value);
    } else if (k == "machine.overload") {
        c.machine.overload_enabled = to_bool(k, value);
    } else if (k == "fd.tol") {
        c.fd_tol = to_double(k, value);
    } else if (k == "fd.max_iter") {
        c.fd_max_iter = to_long(k, value);
    } else if (k == "grid.nx") {
        c.nx = static_cast<int>(to_long(k, value));
    } else if (k == "grid.ny") {
        c.ny = static_cast<int>(to_long(k, value));
    } else if (k == "grid.extent") {
        c.extent = to_double(k, value);
    } else if (k == "run.walks") {
        c.walks = to_long(k, value);
    } else if (k == "run.seed") {
        c.seed = static_cast<std::uint64_t>(to_long(k, value));
    } else if (k == "run.workers") {
        c.workers = static_cast<int>(to_long(k, value));
    } else if (k == "output.out") {
        c.out_prefix = value;
    } else if (k == "output.range") {
        parse_range(value, c.range_lo, c.range_hi);
    } else if (k == "output.image") {
        c.image = to_bool(k, value);
    } else {
        throw std::invalid_argument("config: unknown key '" + k + "'");
    }
}

}  // namespace

void apply_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        apply_key(config, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void write_pgm(const FieldGrid& grid, const std::string& path, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("write_pgm: range lo must be < hi");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << grid.nx << " " << grid.ny << "\n255\n";
    std::vector<unsigned char> row(grid.nx);
    for (int r = 0; r < grid.ny; ++r) {
        const int j = grid.ny - 1 - r;  // image top is y = +extent
        for (int i = 0; i < grid.nx; ++i) {
            const FieldCell& c = grid.at(i, j);
            if (c.cls == CellClass::Invalid) {
                row[i] = 0;
                continue;
            }
            const double t = (c.mean - lo) / (hi - lo) * 255.0;
            row[i] = static_cast<unsigned char>(std::clamp(std::floor(t + 0.5), 0.0, 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), grid.nx);
    }
    if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

namespace {

// Exceptions -> exit codes: bad input 2, runtime/numerical failure 3.
template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

ProgressFn row_progress() {
    return [](int done, int total) {
        std::fprintf(stderr, "\rprogress: %d/%d rows", done, total);
        if (done == total) std::fprintf(stderr, "\n");
        std::fflush(stderr);
    };
}

void write_outputs(const RunConfig& config, const FieldGrid& grid) {
    write_field_csv(grid, config.out_prefix + ".csv");
    if (config.image)
        write_pgm(grid, config.out_prefix + ".pgm", config.range_lo, config.range_hi);
}

}  // namespace

int cmd_solve_mc(const RunConfig& config) {
    return run_guarded([&] {
        const DomainSpec domain = config.domain();
        const auto t0 = std::chrono::steady_clock::now();
        SolveStats stats;
        const FieldGrid grid =
            solve_field(domain, config.params, config.machine, config.walk, config.nx,
                        config.ny, config.grid_extent(), config.walks, config.seed,
                        config.resolve_workers(), &stats, row_progress());
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(config, grid);
        std::printf("walks=%ld censored=%ld seconds=%.3f walks_per_second=%.0f\n", stats.walks,
                    stats.censored, seconds, stats.walks / std::max(seconds, 1e-9));
    });
}

int cmd_solve_fd(const RunConfig& config) {
    return run_guarded([&] {
        const DomainSpec domain = config.domain();
        const auto t0 = std::chrono::steady_clock::now();
        const StencilSystem sys = rasterize(domain, config.nx, config.ny);
        const FieldGrid grid = solve_fd(sys, config.params, config.fd_tol, config.fd_max_iter);
        const double residual = fd_relative_residual(sys, config.params, grid);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(config, grid);
        std::printf("unknowns=%ld residual=%.3e seconds=%.3f\n", sys.unknown_count, residual,
                    seconds);
    });
}

int cmd_compare(const std::string& field_a_path, const std::string& field_b_path,
                const std::string& out_prefix, double range_lo, double range_hi) {
    return run_guarded([&] {
        const FieldGrid a = read_field_csv(field_a_path);
        const FieldGrid b = read_field_csv(field_b_path);
        const ErrorStats stats = compare(a, b);
        write_field_csv(stats.error, out_prefix + "_error.csv");
        write_pgm(stats.error, out_prefix + "_error.pgm", range_lo, range_hi);
        std::printf("max_abs=%.6g mean_abs=%.6g rms=%.6g\n", stats.max_abs, stats.mean_abs,
                    stats.rms);
    });
}

int cmd_bias_study(const RunConfig& config, const std::vector<double>& dt_list, Point2 start) {
    return run_guarded([&] {
        const DomainSpec domain = config.domain();
        const auto rows = exit_time_study(domain, config.params, config.machine, start,
                                          dt_list, config.walks, config.seed);
        const std::string path = config.out_prefix + "_bias.csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("bias-study: cannot open " + path);
        out << "dt,mean_tau_naive,mean_tau_interp,stderr\n";
        char buf[160];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", r.dt,
                          r.mean_tau_naive, r.mean_tau_interp, r.stderr_naive);
            out << buf;
        }
        bool ge = true, monotone = true;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].mean_tau_naive < rows[i].mean_tau_interp) ge = false;
            if (i > 0) {
                const double allowance = 2.0 * std::hypot(rows[i].stderr_naive,
                                                          rows[i - 1].stderr_naive);
                if (rows[i].mean_tau_naive > rows[i - 1].mean_tau_naive + allowance)
                    monotone = false;
            }
        }
        std::printf("naive_ge_interp=%s monotone_decreasing=%s rows=%zu\n",
                    ge ? "pass" : "fail", monotone ? "pass" : "fail", rows.size());
    });
}

int cmd_make_lut(const RunConfig& config, int resolution, const std::string& out_path) {
    return run_guarded([&] {
        const DomainSpec domain = config.domain();
        const LookupBoundaryOracle lut = build_lookup(domain, resolution);
        save_lookup(lut, out_path);
        std::printf("resolution=%d bytes=%zu\n", lut.resolution, 16 + lut.words.size());
    });
}

int cmd_lut_solve(const RunConfig& config, const std::string& lut_path) {
    return run_guarded([&] {
        const DomainSpec domain = config.domain();  // geometry only sets the extent
        const LookupBoundaryOracle lut = load_lookup(lut_path, domain.outer_half_width);
        const auto t0 = std::chrono::steady_clock::now();
        SolveStats stats;
        const FieldGrid grid =
            solve_field_lut(lut, config.params, config.machine, config.walk, config.nx,
                            config.ny, config.grid_extent(), config.walks, config.seed,
                            config.resolve_workers(), &stats, row_progress());
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(config, grid);
        std::printf("walks=%ld censored=%ld seconds=%.3f walks_per_second=%.0f\n", stats.walks,
                    stats.censored, seconds, stats.walks / std::max(seconds, 1e-9));
    });
}

int cmd_render(const std::string& field_csv, const std::string& out_image, double range_lo,
               double range_hi) {
    return run_guarded([&] {
        const FieldGrid grid = read_field_csv(field_csv);
        write_pgm(grid, out_image, range_lo, range_hi);
        std::printf("image=%s nx=%d ny=%d\n", out_image.c_str(), grid.nx, grid.ny);
    });
}

}  // namespace fkwalk
