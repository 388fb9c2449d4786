#pragma once

// Shared plumbing: error type, seed derivation, and a deterministic RNG.
//
// All randomness in the library flows through bok::Rng seeded explicitly by
// the caller. Sub-streams (per tuple, per episode, per step) are derived with
// derive_seed so results do not depend on execution order or thread count.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace bok {

enum class Errc {
    invalid_argument,   // precondition / validation failure
    parse_error,        // malformed file content
    malformed_header,   // dataset header fails schema validation
    feature_length_mismatch,
    action_not_normalized,
    io_error,
    out_of_domain,      // latency-table extrapolation, grid mismatch
    numeric_error,      // NaN loss, non-PD covariance
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

inline std::uint64_t split_mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent sub-stream seed for (seed, stream). Chain for nested streams:
// derive_seed(derive_seed(seed, episode), step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return split_mix64(seed ^ split_mix64(stream + 0x9E3779B97F4A7C15ull));
}

// xoshiro256** with explicit Box-Muller so every draw count is under our
// control (std::normal_distribution's algorithm is implementation-defined,
// which would make byte-level reproducibility toolchain-dependent).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x = split_mix64(x);
            s = x;
        }
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe argument for log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; the spare keeps the stream linear.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool has_spare_;
    double spare_;
};

inline double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace bok
