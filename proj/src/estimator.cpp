#include "fkwalk/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fkwalk {

void PointEstimate::accumulate(double sample) {
    if (!std::isfinite(sample)) throw std::runtime_error("accumulate: non-finite sample");
    ++n;
    const double delta = sample - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (sample - mean);
}

double PointEstimate::standard_error() const {
    if (n < 2) return 0.0;
    const double var_mean = m2 / (static_cast<double>(n) * static_cast<double>(n - 1));
    return var_mean > 0.0 ? std::sqrt(var_mean) : 0.0;
}

PointEstimate merge(const PointEstimate& a, const PointEstimate& b) {
    PointEstimate out;
    out.n_censored = a.n_censored + b.n_censored;
    out.n = a.n + b.n;
    if (out.n == 0) return out;
    if (a.n == 0) {
        out.mean = b.mean;
        out.m2 = b.m2;
        return out;
    }
    if (b.n == 0) {
        out.mean = a.mean;
        out.m2 = a.m2;
        return out;
    }
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * nb / (na + nb);
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
    return out;
}

std::uint64_t seed_for(std::uint64_t base_seed, std::uint64_t ix, std::uint64_t iy,
                       std::uint64_t j) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ ix);
    h = mix64(h ^ iy);
    h = mix64(h ^ j);
    return h;
}

namespace {

template <typename WalkFn>
PointEstimate estimate_with(WalkFn&& walk, const SdeParams& params, long n_walks,
                            std::uint64_t base_seed, std::uint64_t ix, std::uint64_t iy) {
    if (n_walks < 1) throw std::invalid_argument("estimate_point: n_walks must be >= 1");
    PointEstimate est;
    for (long j = 0; j < n_walks; ++j) {
        NoiseSource noise = NoiseSource::ideal(seed_for(base_seed, ix, iy, j));
        const WalkOutcome out = walk(noise);
        if (out.cause == WalkCause::MaxSteps) {
            ++est.n_censored;
            continue;
        }
        double g = out.boundary_g;
        est.accumulate(std::exp(-params.sigma_abs * out.tau) * g + out.source_integral);
    }
    if (est.n == 0) throw std::runtime_error("estimate_point: every walk was censored");
    return est;
}

}  // namespace

PointEstimate estimate_point(const DomainSpec& domain, const SdeParams& params,
                             const MachineModel& machine, const WalkConfig& cfg, Point2 start,
                             long n_walks, std::uint64_t base_seed, std::uint64_t ix,
                             std::uint64_t iy) {
    return estimate_with(
        [&](NoiseSource& noise) { return run_walk(domain, params, machine, cfg, start, noise); },
        params, n_walks, base_seed, ix, iy);
}

PointEstimate estimate_point_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                                 const MachineModel& machine, const WalkConfig& cfg,
                                 Point2 start, long n_walks, std::uint64_t base_seed,
                                 std::uint64_t ix, std::uint64_t iy) {
    return estimate_with(
        [&](NoiseSource& noise) {
            return run_walk_lut(oracle, params, machine, cfg, start, noise);
        },
        params, n_walks, base_seed, ix, iy);
}

FieldGrid FieldGrid::make(int nx, int ny, double extent) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("FieldGrid: nx, ny must be >= 2");
    if (!(extent > 0.0)) throw std::invalid_argument("FieldGrid: extent must be > 0");
    FieldGrid g;
    g.nx = nx;
    g.ny = ny;
    g.extent = extent;
    g.cells.assign(static_cast<std::size_t>(nx) * ny, FieldCell{});
    return g;
}

double FieldGrid::node_x(int i) const { return -extent + 2.0 * extent * i / (nx - 1); }
double FieldGrid::node_y(int j) const { return -extent + 2.0 * extent * j / (ny - 1); }

FieldCell& FieldGrid::at(int i, int j) {
    return cells[static_cast<std::size_t>(j) * nx + i];
}
const FieldCell& FieldGrid::at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * nx + i];
}

namespace {

struct NodeTask {
    // Solved cells get a walk estimate; the others are filled immediately.
    enum class Kind { Walk, Fixed, Invalid } kind;
    double fixed_value = 0.0;
};

int resolve_workers(int worker_count) {
    if (worker_count > 0) return worker_count;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename ClassifyFn, typename EstimateFn>
FieldGrid solve_field_impl(ClassifyFn&& classify_node, EstimateFn&& estimate_node, int nx,
                           int ny, double extent, int worker_count, SolveStats* stats,
                           const ProgressFn& progress) {
    FieldGrid grid = FieldGrid::make(nx, ny, extent);

    std::vector<NodeTask> tasks(grid.cells.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            tasks[static_cast<std::size_t>(j) * nx + i] =
                classify_node(grid.node_x(i), grid.node_y(j));

    std::atomic<long> next_node{0};
    std::atomic<long> total_walks{0};
    std::atomic<long> total_censored{0};
    std::atomic<long> failed{0};
    std::vector<std::atomic<int>> row_left(ny);
    for (int j = 0; j < ny; ++j) row_left[j].store(nx, std::memory_order_relaxed);
    std::atomic<int> rows_done{0};
    std::mutex progress_mu;

    const long n_cells = static_cast<long>(grid.cells.size());
    auto worker = [&]() {
        for (;;) {
            const long idx = next_node.fetch_add(1, std::memory_order_relaxed);
            if (idx >= n_cells) return;
            const int i = static_cast<int>(idx % nx);
            const int j = static_cast<int>(idx / nx);
            FieldCell& cell = grid.cells[idx];
            const NodeTask& task = tasks[idx];
            switch (task.kind) {
                case NodeTask::Kind::Fixed:
                    cell = {CellClass::FixedBoundary, task.fixed_value, 0.0, 0};
                    break;
                case NodeTask::Kind::Invalid:
                    cell = {CellClass::Invalid, 0.0, 0.0, 0};
                    break;
                case NodeTask::Kind::Walk:
                    try {
                        const PointEstimate est = estimate_node(grid.node_x(i), grid.node_y(j),
                                                                static_cast<std::uint64_t>(i),
                                                                static_cast<std::uint64_t>(j));
                        cell = {CellClass::Solved, est.mean, est.standard_error(), est.n};
                        total_walks.fetch_add(est.n + est.n_censored, std::memory_order_relaxed);
                        total_censored.fetch_add(est.n_censored, std::memory_order_relaxed);
                    } catch (const std::exception&) {
                        cell = {CellClass::Invalid, 0.0, 0.0, 0};
                        failed.fetch_add(1, std::memory_order_relaxed);
                    }
                    break;
            }
            if (row_left[j].fetch_sub(1, std::memory_order_acq_rel) == 1) {
                const int done = rows_done.fetch_add(1, std::memory_order_relaxed) + 1;
                if (progress) {
                    std::lock_guard<std::mutex> lock(progress_mu);
                    progress(done, ny);
                }
            }
        }
    };

    const int workers = std::min<long>(resolve_workers(worker_count), n_cells);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (stats) {
        stats->walks = total_walks.load();
        stats->censored = total_censored.load();
        stats->failed_cells = failed.load();
    }
    return grid;
}

}  // namespace

FieldGrid solve_field(const DomainSpec& domain, const SdeParams& params,
                      const MachineModel& machine, const WalkConfig& cfg, int nx, int ny,
                      double extent, long n_walks, std::uint64_t base_seed, int worker_count,
                      SolveStats* stats, const ProgressFn& progress) {
    domain.validate();
    params.validate();
    machine.validate();
    cfg.validate();
    if (extent <= 0.0) extent = domain.outer_half_width;

    auto classify_node = [&](double x, double y) -> NodeTask {
        const RegionClass rc = classify(domain, {x, y});
        switch (rc.kind) {
            case RegionClass::Kind::Interior:
                return {NodeTask::Kind::Walk, 0.0};
            case RegionClass::Kind::Boundary:
                return {NodeTask::Kind::Fixed, boundary_value_at(domain, rc.region, {x, y})};
            case RegionClass::Kind::Exterior:
            default:
                return {NodeTask::Kind::Invalid, 0.0};
        }
    };
    auto estimate_node = [&](double x, double y, std::uint64_t ix, std::uint64_t iy) {
        return estimate_point(domain, params, machine, cfg, {x, y}, n_walks, base_seed, ix, iy);
    };
    return solve_field_impl(classify_node, estimate_node, nx, ny, extent, worker_count, stats,
                            progress);
}

FieldGrid solve_field_lut(const LookupBoundaryOracle& oracle, const SdeParams& params,
                          const MachineModel& machine, const WalkConfig& cfg, int nx, int ny,
                          double extent, long n_walks, std::uint64_t base_seed,
                          int worker_count, SolveStats* stats, const ProgressFn& progress) {
    params.validate();
    machine.validate();
    cfg.validate();
    if (extent <= 0.0) extent = oracle.extent;

    auto classify_node = [&](double x, double y) -> NodeTask {
        const LookupSample s = lookup_query(oracle, {x, y});
        if (s.chi) return {NodeTask::Kind::Fixed, s.value};
        return {NodeTask::Kind::Walk, 0.0};
    };
    auto estimate_node = [&](double x, double y, std::uint64_t ix, std::uint64_t iy) {
        return estimate_point_lut(oracle, params, machine, cfg, {x, y}, n_walks, base_seed, ix,
                                  iy);
    };
    return solve_field_impl(classify_node, estimate_node, nx, ny, extent, worker_count, stats,
                            progress);
}

namespace {

const char* flag_name(CellClass c) {
    switch (c) {
        case CellClass::Solved: return "solved";
        case CellClass::FixedBoundary: return "fixed";
        default: return "invalid";
    }
}

}  // namespace

void write_field_csv(const FieldGrid& grid, std::ostream& out) {
    out << "x,y,u,stderr,n,flag\n";
    char buf[160];
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const FieldCell& c = grid.at(i, j);
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%ld,%s\n", grid.node_x(i),
                          grid.node_y(j), c.mean, c.se, c.n, flag_name(c.cls));
            out << buf;
        }
    }
}

void write_field_csv(const FieldGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    write_field_csv(grid, out);
    if (!out) throw std::runtime_error("write_field_csv: write failed for " + path);
}

FieldGrid read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("read_field_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,u,stderr,n,flag", 0) != 0)
        throw std::invalid_argument("read_field_csv: missing header in " + path);

    struct Row {
        double x, y, u, se;
        long n;
        CellClass cls;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row r{};
        char flag[16] = {};
        const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%ld,%15s", &r.x, &r.y, &r.u,
                                    &r.se, &r.n, flag);
        if (got != 6) throw std::invalid_argument("read_field_csv: malformed row in " + path);
        const std::string f = flag;
        if (f == "solved")
            r.cls = CellClass::Solved;
        else if (f == "fixed")
            r.cls = CellClass::FixedBoundary;
        else if (f == "invalid")
            r.cls = CellClass::Invalid;
        else
            throw std::invalid_argument("read_field_csv: unknown flag in " + path);
        rows.push_back(r);
    }
    if (rows.size() < 4) throw std::invalid_argument("read_field_csv: too few rows in " + path);

    // Recover the grid shape: rows are row-major, x fastest.
    int nx = 0;
    while (nx < static_cast<int>(rows.size()) && rows[nx].y == rows[0].y) ++nx;
    if (nx < 2 || rows.size() % nx != 0)
        throw std::invalid_argument("read_field_csv: inconsistent grid in " + path);
    const int ny = static_cast<int>(rows.size()) / nx;
    if (ny < 2) throw std::invalid_argument("read_field_csv: inconsistent grid in " + path);
    const double extent = std::max(std::abs(rows.front().x), std::abs(rows.back().x));
    if (!(extent > 0.0))
        throw std::invalid_argument("read_field_csv: cannot infer extent in " + path);

    FieldGrid grid = FieldGrid::make(nx, ny, extent);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Row& r = rows[static_cast<std::size_t>(j) * nx + i];
            if (std::abs(r.x - grid.node_x(i)) > 1e-9 * extent ||
                std::abs(r.y - grid.node_y(j)) > 1e-9 * extent)
                throw std::invalid_argument("read_field_csv: nodes not on a regular grid in " +
                                            path);
            grid.at(i, j) = {r.cls, r.u, r.se, r.n};
        }
    }
    return grid;
}

}  // namespace fkwalk
