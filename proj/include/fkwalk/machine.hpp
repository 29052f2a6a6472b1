// Machine-fidelity model of the analog signal chain: seeded noise sources
// (ideal or DC-biased with a first-order removal loop), the bounded value
// range with overload detection, and readout quantization.
#pragma once

#include <cstdint>
#include <utility>

#include "fkwalk/geometry.hpp"

namespace fkwalk {

// splitmix64 finalizer; also used to expand seeds and by seed_for().
std::uint64_t mix64(std::uint64_t z);

// xoshiro256++ stream seeded via splitmix64. Reproducible across platforms.
class Rng64 {
  public:
    explicit Rng64(std::uint64_t seed);
    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double next_double();
    // Uniform in (-1, 1).
    double next_signed();

  private:
    std::uint64_t s_[4];
};

struct MachineModel {
    double range_limit = 1.0;
    double readout_quantum = 1e-4;  // 0 disables quantization
    bool overload_enabled = true;

    void validate() const;  // throws std::invalid_argument
};

// Rounds to the nearest multiple of readout_quantum (ties to even), then
// clamps to [-range_limit, +range_limit].
double quantize_readout(const MachineModel& model, double v);

// True iff overloads are enabled and either coordinate exceeds the range.
bool check_overload(const MachineModel& model, Point2 p);

// Per-axis Wiener increment generator. Gaussian draws use the Marsaglia
// polar method (two draws per call) over the xoshiro stream, so a source is
// bit-reproducible from its seed. Biased mode shifts each raw draw by a DC
// offset and subtracts a first-order tracking estimate of the running mean,
// mirroring the self-zeroing integrator in front of the path integrator.
class NoiseSource {
  public:
    static NoiseSource ideal(std::uint64_t seed);
    static NoiseSource biased(std::uint64_t seed, double dc_bias_x, double dc_bias_y,
                              double highpass_time_constant);

    // Returns (dWx, dWy) with standard deviation sqrt(dt) per axis.
    // Throws std::invalid_argument for dt <= 0.
    std::pair<double, double> sample_increment(double dt);

    bool biased() const { return biased_; }
    double bias_state_x() const { return bias_x_; }
    double bias_state_y() const { return bias_y_; }

  private:
    explicit NoiseSource(std::uint64_t seed);

    Rng64 rng_;
    bool biased_ = false;
    double dc_x_ = 0.0;
    double dc_y_ = 0.0;
    double t_hp_ = 0.01;
    double bias_x_ = 0.0;  // tracking estimate of the raw-draw mean
    double bias_y_ = 0.0;
};

}  // namespace fkwalk
