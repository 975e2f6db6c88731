#include "mixcit/core_math.hpp"

#include <cmath>
#include <numbers>

#include "mixcit/errors.hpp"

namespace mixcit {

double digamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw DataError("digamma: argument must be finite and positive");

  // B_{2k}/(2k) coefficients of psi(x) ~ ln x - 1/(2x) - sum c_k x^{-2k}
  static constexpr double coeff[8] = {
      1.0 / 12.0,   -1.0 / 120.0,     1.0 / 252.0, -1.0 / 240.0,
      1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0,  -3617.0 / 8160.0};

  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }

  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2;
  for (double c : coeff) {
    series += c * power;
    power *= inv2;
  }
  return acc + std::log(x) - 0.5 * inv - series;
}

double log_unit_ball_volume(int dim, NormOrder p) {
  if (dim < 1) throw ConfigError("log_unit_ball_volume: dim must be >= 1");
  if (p != NormOrder::MaxNorm)
    throw ConfigError("log_unit_ball_volume: only the max-norm is supported");
  return static_cast<double>(dim) * std::numbers::ln2;
}

}  // namespace mixcit
