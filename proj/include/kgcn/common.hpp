#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kgcn {

// Numerical guards shared across the geometry kernels.
inline constexpr double kTaylorEps = 1e-10;     // |kappa|*u^2 below this -> series branch
inline constexpr double kBoundaryEps = 1e-5;    // radial clamp margin inside the kappa<0 ball
inline constexpr double kAntipodalEps = 1e-15;  // kappa-addition denominator guard
inline constexpr double kCondEps = 1e-12;       // gyromidpoint denominator guard
inline constexpr double kMinNorm = 1e-15;       // zero-vector guard for radial factors
inline constexpr double kSatAngle = 1e-6;       // tape-side saturation margin on tan (kappa>0)
inline constexpr double kSatTanh = 1e-12;       // tape-side saturation margin on artanh (kappa<0)
inline constexpr double kAsinClamp = 1e-7;      // asin argument clamp margin (kappa>0)

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};
struct AntipodalError : Error {
  using Error::Error;
};
struct DegenerateMidpointError : Error {
  explicit DegenerateMidpointError(const std::string& msg, int row_index = -1)
      : Error(msg), row(row_index) {}
  int row;
};
struct ZeroWeightError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct NotScalarError : Error {
  using Error::Error;
};
struct ParseError : Error {
  explicit ParseError(const std::string& msg, int line_number = 0)
      : Error(msg), line(line_number) {}
  int line;
};
struct IndexError : Error {
  using Error::Error;
};
struct InsufficientGraphError : Error {
  using Error::Error;
};
struct InfeasibleSplitError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Deterministic RNG. All randomness in the library flows through this type so
// that a (master seed, run index) pair fully determines every output file.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  // Box-Muller, no state carried between calls
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // independent stream for (master seed, run index) pairs; splitmix64 mix
  static uint64_t derive(uint64_t master, uint64_t index) {
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace kgcn
