#ifndef HYSHADOW_RNG_HPP
#define HYSHADOW_RNG_HPP

#include <cstdint>
#include <random>

namespace hyshadow {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// the conversions below are done by hand to keep runs portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hyshadow

#endif  // HYSHADOW_RNG_HPP
