#include "nanolaser/rng.hpp"

#include <cmath>
#include <numbers>

namespace nanolaser {

// Box-Muller on two 53-bit uniform pairs.
void NormalStream::refill() {
  const auto a = draw();
  const auto b = draw();
  const double u1 = to_unit(a[0], a[1]);
  const double u2 = to_unit(a[2], a[3]);
  const double u3 = to_unit(b[0], b[1]);
  const double u4 = to_unit(b[2], b[3]);
  const double r1 = std::sqrt(-2.0 * std::log(u1));
  const double r2 = std::sqrt(-2.0 * std::log(u3));
  const double t1 = 2.0 * std::numbers::pi * u2;
  const double t2 = 2.0 * std::numbers::pi * u4;
  buf_ = {r1 * std::cos(t1), r1 * std::sin(t1), r2 * std::cos(t2), r2 * std::sin(t2)};
  pos_ = 0;
}

}  // namespace nanolaser
