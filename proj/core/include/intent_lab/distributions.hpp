#pragma once

#include <optional>
#include <string>

namespace intent_lab {

// Private-type law. Only uniform laws are supported; a truncated uniform is the uniform law on
// [lo, min(hi, truncation)].
struct TypeDistribution {
  enum class Kind { Uniform, TruncatedUniform };

  Kind kind = Kind::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> truncation;

  static TypeDistribution uniform(double lo, double hi);
  static TypeDistribution truncated(double lo, double hi, double cap);

  void validate() const;

  double upper() const { return truncation ? *truncation : hi; }
  double width() const { return upper() - lo; }
  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double u) const;
  // Probability mass of [a, b] intersected with the effective support.
  double mass(double a, double b) const;

  // The affine image x -> scale * x + shift (scale > 0); stays uniform.
  TypeDistribution affine(double scale, double shift) const;
  // Conditional law given x <= cap.
  TypeDistribution truncate_at(double cap) const;
};

std::string to_string(TypeDistribution::Kind kind);

}  // namespace intent_lab
