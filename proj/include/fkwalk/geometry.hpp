// Solution-domain geometry: region classification, boundary values,
// segment/boundary crossings, and the byte-table boundary oracle that
// emulates an ADC/memory/DAC function generator.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fkwalk {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

bool finite(Point2 p);

// Circular hole cut out of the domain; its closed disk is outside the
// active region and carries a fixed boundary value.
struct Inclusion {
    Point2 center;
    double radius = 0.0;
    double boundary_value = 0.0;
};

enum class OuterShape { Square, Disk };

// Region ids: kOuterRegion for the outer boundary, 0.. for inclusions.
// kLookupRegion marks exits detected by the lookup oracle, which carry
// their own decoded boundary value instead of a region lookup.
inline constexpr int kOuterRegion = -1;
inline constexpr int kLookupRegion = -2;

struct DomainSpec {
    OuterShape outer_shape = OuterShape::Square;
    double outer_half_width = 1.0;  // square half-width, or disk radius
    double outer_boundary_value = 0.0;
    std::vector<Inclusion> inclusions;

    // Optional position-dependent value on the outer boundary (e.g. an
    // angular profile on a disk). When set it overrides
    // outer_boundary_value wherever a boundary point is known.
    std::function<double(Point2)> outer_value_fn;

    void validate() const;  // throws std::invalid_argument

    // Square [-1,1]^2 with the two r=0.25 circles at (-0.35,+0.35) and
    // (+0.35,-0.35), values -1/+1, outer value 0.
    static DomainSpec benchmark();
};

struct RegionClass {
    enum class Kind { Interior, Boundary, Exterior };
    Kind kind = Kind::Interior;
    int region = kOuterRegion;  // valid when kind == Boundary
    double value = 0.0;         // boundary value, valid when kind == Boundary

    bool interior() const { return kind == Kind::Interior; }
};

// Total on finite points. Interior means strictly inside the outer shape
// and strictly outside every inclusion; a point on or inside an inclusion
// disk classifies Boundary(that inclusion); points beyond the outer shape
// are Exterior.
RegionClass classify(const DomainSpec& domain, Point2 p);

// Constant boundary value of a region; throws on an unknown region id.
double boundary_value(const DomainSpec& domain, int region);

// Boundary value at a known boundary point (honors outer_value_fn).
double boundary_value_at(const DomainSpec& domain, int region, Point2 p);

struct SegmentHit {
    Point2 point;
    int region = kOuterRegion;
    double fraction = 0.0;  // lambda in [0,1] along p0->p1
};

// Earliest boundary crossing of the straight segment p0->p1, or nullopt if
// p1 is still interior. p0 must classify Interior. Circle crossings use the
// smaller positive root of the segment/circle quadratic; square crossings a
// per-edge linear solve. Ties at equal fraction go to the lowest region id
// (outer before inclusions).
std::optional<SegmentHit> segment_exit(const DomainSpec& domain, Point2 p0, Point2 p1);

// Byte table emulating the table-lookup function generator: two quantized
// coordinates address one byte per cell; bit 7 is the characteristic flag
// (set = outside the active region, halt), bits 0..6 the boundary value.
struct LookupBoundaryOracle {
    int resolution = 256;
    int value_bits = 7;
    double extent = 1.0;  // table covers [-extent, extent]^2
    std::vector<std::uint8_t> words;

    std::size_t cell_index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(resolution) + i;
    }
};

// Value codes 1..127 decode to (v - 64) / 63, so -1, 0, +1 are exact.
std::uint8_t encode_boundary_value(double f);
double decode_boundary_value(std::uint8_t code);

// Samples classify() at cell centers. resolution must be a power of two in
// [16, 4096]; value_bits must be 7. The table extent is the domain's outer
// half-width.
LookupBoundaryOracle build_lookup(const DomainSpec& domain, int resolution = 256,
                                  int value_bits = 7);

struct LookupSample {
    bool chi = false;  // set = outside the active region
    double value = 0.0;
};

// Out-of-range coordinates clamp to edge cells (ADC saturation).
LookupSample lookup_query(const LookupBoundaryOracle& oracle, Point2 p);

// Binary table file: 16-byte header (magic "FKLUT1\0\0", u32-LE resolution,
// u8 value_bits, 3 zero bytes) followed by resolution^2 bytes row-major
// (j outer, i inner). The extent is not stored and must come from config.
void save_lookup(const LookupBoundaryOracle& oracle, const std::string& path);
LookupBoundaryOracle load_lookup(const std::string& path, double extent = 1.0);

}  // namespace fkwalk
