#include "ibot/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "ibot/prob.hpp"

namespace ibot {

double inverse_binary_entropy(double h) {
  const double ln2 = std::log(2.0);
  if (!(h >= 0.0 && h <= ln2)) throw std::domain_error("inverse_binary_entropy: h outside [0, log 2]");
  double lo = 0.0, hi = 0.5;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (binary_entropy(mid) < h)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double bernoulli_R(double I, double e) {
  if (!(e >= 0.0 && e < 0.5)) throw std::domain_error("bernoulli_R: e outside [0, 1/2)");
  const double ln2 = std::log(2.0);
  const double cap = ln2 - binary_entropy(e);
  if (!(I >= 0.0 && I <= cap + 1e-15)) throw std::domain_error("bernoulli_R: I outside [0, log2 - H(e)]");
  const double u = inverse_binary_entropy(std::min(ln2, ln2 - I));
  const double arg = std::max(0.0, (u - e) / (1.0 - 2.0 * e));
  return ln2 - binary_entropy(arg);
}

double gaussian_R(double I, double snr) {
  if (!(snr > 0.0)) throw std::domain_error("gaussian_R: snr must be positive");
  const double cap = 0.5 * std::log1p(snr);
  if (!(I >= 0.0 && I < cap)) throw std::domain_error("gaussian_R: I outside [0, capacity)");
  return -0.5 * std::log(((1.0 + snr) * std::exp(-2.0 * I) - 1.0) / snr);
}

double constant_slope_R(double I) {
  const double ln2 = std::log(2.0);
  if (!(I >= 0.0 && I <= ln2 + 1e-15)) throw std::domain_error("constant_slope_R: I outside [0, log 2]");
  return I;
}

}  // namespace ibot
