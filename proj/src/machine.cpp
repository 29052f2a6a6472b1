#include "fkwalk/machine.hpp"

#include <cmath>
#include <stdexcept>

namespace fkwalk {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}

Rng64::Rng64(std::uint64_t seed) {
    // Expand the seed with splitmix64; the state cannot be all zero.
    std::uint64_t sm = seed;
    for (auto& w : s_) {
        sm += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = sm;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        w = z ^ (z >> 31);
    }
}

std::uint64_t Rng64::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng64::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng64::next_signed() { return 2.0 * next_double() - 1.0; }

void MachineModel::validate() const {
    if (!(range_limit > 0.0))
        throw std::invalid_argument("MachineModel: range_limit must be > 0");
    if (readout_quantum < 0.0 || readout_quantum >= range_limit)
        throw std::invalid_argument("MachineModel: readout_quantum must be in [0, range_limit)");
}

double quantize_readout(const MachineModel& model, double v) {
    double out = v;
    if (model.readout_quantum > 0.0) {
        // nearbyint rounds half to even under the default FP environment.
        out = std::nearbyint(v / model.readout_quantum) * model.readout_quantum;
    }
    if (out > model.range_limit) out = model.range_limit;
    if (out < -model.range_limit) out = -model.range_limit;
    return out;
}

bool check_overload(const MachineModel& model, Point2 p) {
    if (!model.overload_enabled) return false;
    return std::abs(p.x) > model.range_limit || std::abs(p.y) > model.range_limit;
}

NoiseSource::NoiseSource(std::uint64_t seed) : rng_(seed) {}

NoiseSource NoiseSource::ideal(std::uint64_t seed) { return NoiseSource(seed); }

NoiseSource NoiseSource::biased(std::uint64_t seed, double dc_bias_x, double dc_bias_y,
                                double highpass_time_constant) {
    if (!(highpass_time_constant > 0.0))
        throw std::invalid_argument("NoiseSource: highpass time constant must be > 0");
    NoiseSource src(seed);
    src.biased_ = true;
    src.dc_x_ = dc_bias_x;
    src.dc_y_ = dc_bias_y;
    src.t_hp_ = highpass_time_constant;
    return src;
}

std::pair<double, double> NoiseSource::sample_increment(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be > 0");

    // Marsaglia polar method: one accepted pair per call.
    double u, v, s;
    do {
        u = rng_.next_signed();
        v = rng_.next_signed();
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    double gx = u * m;
    double gy = v * m;

    const double root_dt = std::sqrt(dt);
    if (!biased_) return {gx * root_dt, gy * root_dt};

    // Raw draws carry the DC offset; the output subtracts the current
    // tracking estimate, which then relaxes toward the raw sample with
    // time constant t_hp.
    const double raw_x = gx + dc_x_;
    const double raw_y = gy + dc_y_;
    const double out_x = raw_x - bias_x_;
    const double out_y = raw_y - bias_y_;
    const double gain = dt / t_hp_;
    bias_x_ += gain * (raw_x - bias_x_);
    bias_y_ += gain * (raw_y - bias_y_);
    return {out_x * root_dt, out_y * root_dt};
}

}  // namespace fkwalk
