#include "intent_lab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intent_lab {

TypeDistribution TypeDistribution::uniform(double lo, double hi) {
  TypeDistribution d{Kind::Uniform, lo, hi, std::nullopt};
  d.validate();
  return d;
}

TypeDistribution TypeDistribution::truncated(double lo, double hi, double cap) {
  TypeDistribution d{Kind::TruncatedUniform, lo, hi, cap};
  d.validate();
  return d;
}

void TypeDistribution::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
    throw std::invalid_argument("type distribution needs lo < hi");
  if (kind == Kind::TruncatedUniform) {
    if (!truncation) throw std::invalid_argument("truncated distribution needs a cap");
    if (!(*truncation > lo && *truncation <= hi))
      throw std::invalid_argument("truncation cap must lie in (lo, hi]");
  } else if (truncation) {
    throw std::invalid_argument("plain uniform distribution cannot carry a cap");
  }
}

double TypeDistribution::cdf(double x) const {
  if (x <= lo) return 0.0;
  const double u = upper();
  if (x >= u) return 1.0;
  return (x - lo) / (u - lo);
}

double TypeDistribution::pdf(double x) const {
  if (x < lo || x > upper()) return 0.0;
  return 1.0 / width();
}

double TypeDistribution::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  return lo + u * width();
}

double TypeDistribution::mass(double a, double b) const {
  if (b <= a) return 0.0;
  return cdf(b) - cdf(a);
}

TypeDistribution TypeDistribution::affine(double scale, double shift) const {
  if (!(scale > 0.0)) throw std::invalid_argument("affine map needs a positive scale");
  TypeDistribution d = *this;
  d.lo = scale * lo + shift;
  d.hi = scale * hi + shift;
  if (truncation) d.truncation = scale * *truncation + shift;
  return d;
}

TypeDistribution TypeDistribution::truncate_at(double cap) const {
  if (cap >= upper()) return *this;
  return truncated(lo, hi, cap);
}

std::string to_string(TypeDistribution::Kind kind) {
  return kind == TypeDistribution::Kind::Uniform ? "uniform" : "truncated_uniform";
}

}  // namespace intent_lab
