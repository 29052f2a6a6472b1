#include "fkwalk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fkwalk {

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void DomainSpec::validate() const {
    if (!(outer_half_width > 0.0))
        throw std::invalid_argument("DomainSpec: outer_half_width must be > 0");
    for (std::size_t a = 0; a < inclusions.size(); ++a) {
        const Inclusion& inc = inclusions[a];
        if (!(inc.radius > 0.0))
            throw std::invalid_argument("DomainSpec: inclusion radius must be > 0");
        if (!finite(inc.center))
            throw std::invalid_argument("DomainSpec: inclusion center must be finite");
        const double hw = outer_half_width;
        bool inside;
        if (outer_shape == OuterShape::Square) {
            inside = std::abs(inc.center.x) + inc.radius < hw &&
                     std::abs(inc.center.y) + inc.radius < hw;
        } else {
            inside = std::hypot(inc.center.x, inc.center.y) + inc.radius < hw;
        }
        if (!inside)
            throw std::invalid_argument("DomainSpec: inclusion must lie strictly inside the outer boundary");
        for (std::size_t b = a + 1; b < inclusions.size(); ++b) {
            const Inclusion& other = inclusions[b];
            const double d = std::hypot(inc.center.x - other.center.x,
                                        inc.center.y - other.center.y);
            if (!(d > inc.radius + other.radius))
                throw std::invalid_argument("DomainSpec: inclusions must be pairwise disjoint");
        }
    }
}

DomainSpec DomainSpec::benchmark() {
    DomainSpec d;
    d.outer_shape = OuterShape::Square;
    d.outer_half_width = 1.0;
    d.outer_boundary_value = 0.0;
    d.inclusions = {
        {{-0.35, 0.35}, 0.25, -1.0},
        {{0.35, -0.35}, 0.25, +1.0},
    };
    return d;
}

RegionClass classify(const DomainSpec& domain, Point2 p) {
    // Inclusion disks first: a point on or inside one belongs to that
    // boundary regardless of anything else (disks are strictly interior
    // to the outer shape by the domain invariants).
    for (std::size_t k = 0; k < domain.inclusions.size(); ++k) {
        const Inclusion& inc = domain.inclusions[k];
        const double dx = p.x - inc.center.x;
        const double dy = p.y - inc.center.y;
        if (dx * dx + dy * dy <= inc.radius * inc.radius)
            return {RegionClass::Kind::Boundary, static_cast<int>(k), inc.boundary_value};
    }
    const double hw = domain.outer_half_width;
    if (domain.outer_shape == OuterShape::Square) {
        const double m = std::max(std::abs(p.x), std::abs(p.y));
        if (m < hw) return {RegionClass::Kind::Interior, kOuterRegion, 0.0};
        if (m == hw)
            return {RegionClass::Kind::Boundary, kOuterRegion, boundary_value_at(domain, kOuterRegion, p)};
        return {RegionClass::Kind::Exterior, kOuterRegion, 0.0};
    }
    const double r2 = p.x * p.x + p.y * p.y;
    if (r2 < hw * hw) return {RegionClass::Kind::Interior, kOuterRegion, 0.0};
    if (r2 == hw * hw)
        return {RegionClass::Kind::Boundary, kOuterRegion, boundary_value_at(domain, kOuterRegion, p)};
    return {RegionClass::Kind::Exterior, kOuterRegion, 0.0};
}

double boundary_value(const DomainSpec& domain, int region) {
    if (region == kOuterRegion) return domain.outer_boundary_value;
    if (region >= 0 && static_cast<std::size_t>(region) < domain.inclusions.size())
        return domain.inclusions[region].boundary_value;
    throw std::invalid_argument("boundary_value: unknown region id");
}

double boundary_value_at(const DomainSpec& domain, int region, Point2 p) {
    if (region == kOuterRegion && domain.outer_value_fn) return domain.outer_value_fn(p);
    return boundary_value(domain, region);
}

namespace {

// Earliest crossing of |p0 + t*d - c| = r for t in (0, 1], entering from
// outside (p0 outside the circle). Stable quadratic via the q-form.
std::optional<double> circle_entry(Point2 p0, Point2 d, Point2 c, double r) {
    const double fx = p0.x - c.x;
    const double fy = p0.y - c.y;
    const double a = d.x * d.x + d.y * d.y;
    if (a == 0.0) return std::nullopt;
    const double b = 2.0 * (fx * d.x + fy * d.y);
    const double cc = fx * fx + fy * fy - r * r;
    if (cc <= 0.0) return std::nullopt;  // already on/inside
    if (b >= 0.0) return std::nullopt;   // moving away
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return std::nullopt;
    const double q = -0.5 * (b - std::sqrt(disc));  // b < 0
    const double t = cc / q;                        // smaller positive root
    if (t >= 0.0 && t <= 1.0) return t;
    return std::nullopt;
}

// Earliest crossing of |p0 + t*d| = R leaving from inside (p0 inside).
std::optional<double> circle_escape(Point2 p0, Point2 d, double R) {
    const double a = d.x * d.x + d.y * d.y;
    if (a == 0.0) return std::nullopt;
    const double b = 2.0 * (p0.x * d.x + p0.y * d.y);
    const double cc = p0.x * p0.x + p0.y * p0.y - R * R;  // < 0 inside
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return std::nullopt;
    const double t = (-b + std::sqrt(disc)) / (2.0 * a);  // outgoing root
    if (t >= 0.0 && t <= 1.0) return t;
    return std::nullopt;
}

}  // namespace

std::optional<SegmentHit> segment_exit(const DomainSpec& domain, Point2 p0, Point2 p1) {
    const Point2 d{p1.x - p0.x, p1.y - p0.y};
    std::optional<SegmentHit> best;
    const double hw = domain.outer_half_width;

    // Outer boundary first, so exact fraction ties keep the lowest region.
    if (domain.outer_shape == OuterShape::Square) {
        // First crossing of any edge plane; p0 is strictly inside, so that
        // is the square exit.
        double t_min = 2.0;
        int axis = -1;
        double edge = 0.0;
        auto edge_try = [&](double t, int ax, double e) {
            if (t >= 0.0 && t <= 1.0 && t < t_min) {
                t_min = t;
                axis = ax;
                edge = e;
            }
        };
        if (d.x > 0.0 && p1.x >= hw) edge_try((hw - p0.x) / d.x, 0, hw);
        if (d.x < 0.0 && p1.x <= -hw) edge_try((-hw - p0.x) / d.x, 0, -hw);
        if (d.y > 0.0 && p1.y >= hw) edge_try((hw - p0.y) / d.y, 1, hw);
        if (d.y < 0.0 && p1.y <= -hw) edge_try((-hw - p0.y) / d.y, 1, -hw);
        if (axis >= 0) {
            Point2 h{p0.x + t_min * d.x, p0.y + t_min * d.y};
            if (axis == 0)
                h.x = edge;
            else
                h.y = edge;
            h.x = std::clamp(h.x, -hw, hw);
            h.y = std::clamp(h.y, -hw, hw);
            best = SegmentHit{h, kOuterRegion, t_min};
        }
    } else {
        if (auto t = circle_escape(p0, d, hw)) {
            Point2 h{p0.x + *t * d.x, p0.y + *t * d.y};
            const double n = std::hypot(h.x, h.y);
            if (n > 0.0) {
                h.x *= hw / n;  // land exactly on the rim
                h.y *= hw / n;
            }
            best = SegmentHit{h, kOuterRegion, *t};
        }
    }

    for (std::size_t k = 0; k < domain.inclusions.size(); ++k) {
        const Inclusion& inc = domain.inclusions[k];
        if (auto t = circle_entry(p0, d, inc.center, inc.radius)) {
            if (!best || *t < best->fraction) {
                Point2 h{p0.x + *t * d.x, p0.y + *t * d.y};
                const double n = std::hypot(h.x - inc.center.x, h.y - inc.center.y);
                if (n > 0.0) {
                    h.x = inc.center.x + (h.x - inc.center.x) * inc.radius / n;
                    h.y = inc.center.y + (h.y - inc.center.y) * inc.radius / n;
                }
                best = SegmentHit{h, static_cast<int>(k), *t};
            }
        }
    }
    return best;
}

std::uint8_t encode_boundary_value(double f) {
    long code = std::lround(f * 63.0) + 64;
    code = std::clamp(code, 1L, 127L);
    return static_cast<std::uint8_t>(code);
}

double decode_boundary_value(std::uint8_t code) {
    return (static_cast<int>(code & 0x7F) - 64) / 63.0;
}

LookupBoundaryOracle build_lookup(const DomainSpec& domain, int resolution, int value_bits) {
    if (resolution < 16 || resolution > 4096 || (resolution & (resolution - 1)) != 0)
        throw std::invalid_argument("build_lookup: resolution must be a power of two in [16, 4096]");
    if (value_bits != 7)
        throw std::invalid_argument("build_lookup: value_bits must be 7");
    domain.validate();

    LookupBoundaryOracle lut;
    lut.resolution = resolution;
    lut.value_bits = value_bits;
    lut.extent = domain.outer_half_width;
    lut.words.resize(static_cast<std::size_t>(resolution) * resolution);

    const double cell = 2.0 * lut.extent / resolution;
    for (int j = 0; j < resolution; ++j) {
        const double y = -lut.extent + (j + 0.5) * cell;
        for (int i = 0; i < resolution; ++i) {
            const double x = -lut.extent + (i + 0.5) * cell;
            const RegionClass rc = classify(domain, {x, y});
            std::uint8_t word;
            switch (rc.kind) {
                case RegionClass::Kind::Interior:
                    word = 64;  // chi = 0, value code for 0.0
                    break;
                case RegionClass::Kind::Boundary:
                    word = static_cast<std::uint8_t>(
                        0x80 | encode_boundary_value(boundary_value_at(domain, rc.region, {x, y})));
                    break;
                case RegionClass::Kind::Exterior:
                default:
                    word = static_cast<std::uint8_t>(
                        0x80 | encode_boundary_value(boundary_value_at(domain, kOuterRegion, {x, y})));
                    break;
            }
            lut.words[lut.cell_index(i, j)] = word;
        }
    }
    return lut;
}

LookupSample lookup_query(const LookupBoundaryOracle& oracle, Point2 p) {
    const int res = oracle.resolution;
    auto index = [&](double v) {
        const int i = static_cast<int>(std::floor((v + oracle.extent) / (2.0 * oracle.extent) * res));
        return std::clamp(i, 0, res - 1);
    };
    const std::uint8_t word = oracle.words[oracle.cell_index(index(p.x), index(p.y))];
    return {(word & 0x80) != 0, decode_boundary_value(word)};
}

namespace {
constexpr char kLutMagic[8] = {'F', 'K', 'L', 'U', 'T', '1', '\0', '\0'};
}

void save_lookup(const LookupBoundaryOracle& oracle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_lookup: cannot open " + path);
    std::uint8_t header[16] = {};
    std::memcpy(header, kLutMagic, 8);
    const std::uint32_t res = static_cast<std::uint32_t>(oracle.resolution);
    header[8] = static_cast<std::uint8_t>(res & 0xFF);
    header[9] = static_cast<std::uint8_t>((res >> 8) & 0xFF);
    header[10] = static_cast<std::uint8_t>((res >> 16) & 0xFF);
    header[11] = static_cast<std::uint8_t>((res >> 24) & 0xFF);
    header[12] = static_cast<std::uint8_t>(oracle.value_bits);
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(oracle.words.data()),
              static_cast<std::streamsize>(oracle.words.size()));
    if (!out) throw std::runtime_error("save_lookup: write failed for " + path);
}

LookupBoundaryOracle load_lookup(const std::string& path, double extent) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("load_lookup: cannot open " + path);
    std::uint8_t header[16];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || std::memcmp(header, kLutMagic, 8) != 0)
        throw std::invalid_argument("load_lookup: bad magic in " + path);
    const std::uint32_t res = static_cast<std::uint32_t>(header[8]) |
                              (static_cast<std::uint32_t>(header[9]) << 8) |
                              (static_cast<std::uint32_t>(header[10]) << 16) |
                              (static_cast<std::uint32_t>(header[11]) << 24);
    if (res < 16 || res > 4096 || (res & (res - 1)) != 0)
        throw std::invalid_argument("load_lookup: invalid resolution in " + path);
    if (header[12] != 7) throw std::invalid_argument("load_lookup: unsupported value_bits in " + path);

    LookupBoundaryOracle lut;
    lut.resolution = static_cast<int>(res);
    lut.value_bits = header[12];
    lut.extent = extent;
    lut.words.resize(static_cast<std::size_t>(res) * res);
    in.read(reinterpret_cast<char*>(lut.words.data()), static_cast<std::streamsize>(lut.words.size()));
    if (!in) throw std::invalid_argument("load_lookup: truncated table in " + path);
    return lut;
}

}  // namespace fkwalk
