#ifndef JBD_RNG_HPP
#define JBD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace jbd {

// splitmix64; used to derive sub-stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable random stream: mt19937_64 engine with hand-rolled uniform and
/// Box-Muller normal sampling, so sequences are identical on every platform
/// (std::normal_distribution is implementation-defined).
///
/// Sub-stream rule: stream k of master seed s is seeded with
/// splitmix64(splitmix64(s) ^ splitmix64(k + 1)), so any (seed, stream id)
/// pair names the same sequence regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(stream_id + 1)));
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi); endpoints excluded by nudging away from lo.
  double uniform_open(double lo, double hi) {
    const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// p-by-q matrix of iid standard normals, filled column by column.
  Eigen::MatrixXd normal_matrix(Eigen::Index p, Eigen::Index q) {
    Eigen::MatrixXd x(p, q);
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index i = 0; i < p; ++i) x(i, j) = normal();
    return x;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for the small n used here,
    // but stay exact anyway.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jbd

#endif
