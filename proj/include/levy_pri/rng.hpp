#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace levy_pri {

/// What a random substream is used for. Part of the stream key, so two
/// purposes on the same path never share draws.
enum class StreamPurpose : std::uint64_t {
    jump_times = 1,
    jump_sizes = 2,
    gaussian = 3,
    bridge_extremes = 4,
    kill = 5,
    subordinator = 6,
    overshoot = 7,
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the n-th output is a bijective hash of
/// (key + n * golden), where the key is derived from (seed, index, purpose).
/// Any substream can be regenerated from its key alone, which is what makes
/// per-path results independent of thread count and evaluation order.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) noexcept
        : key_(derive_key(seed, index, purpose)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    /// Standard normal via Box-Muller; the spare variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = 2.0 * 3.14159265358979323846 * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    std::uint64_t draws() const noexcept { return counter_; }

    static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t index,
                                              StreamPurpose purpose) noexcept {
        std::uint64_t k = detail::mix64(seed + detail::kGolden);
        k = detail::mix64(k ^ (index * 0xd1b54a32d192ed03ULL + 1));
        return detail::mix64(k ^ (static_cast<std::uint64_t>(purpose) * 0x8cb92ba72f3d8dd7ULL));
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace levy_pri
