#pragma once

namespace ibot {

/// A point (threshold I, rate R(I)) on a relevance-compression curve, in nats.
struct CurveSample {
  double threshold = 0.0;
  double rate = 0.0;
};

/// Unique u in [0, 1/2] with binary_entropy(u) = h, by bisection to |du| <=
/// 1e-14. Requires 0 <= h <= log 2.
double inverse_binary_entropy(double h);

/// Closed-form relevance-compression function of the jointly Bernoulli model
/// with flip probability e. Domain: 0 <= I <= log 2 - H(e).
double bernoulli_R(double I, double e);

/// Closed-form relevance-compression function of the jointly Gaussian model.
/// Domain: 0 <= I < (1/2) log(1 + snr).
double gaussian_R(double I, double snr);

/// Relevance-compression function of the constant-slope 4x4 joint: the
/// identity on [0, log 2].
double constant_slope_R(double I);

}  // namespace ibot
