#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ibot/prob.hpp"

namespace ibot {

/// Uniform discretization grid for the jointly Gaussian model, in standard
/// deviation units.
struct GaussianGridSpec {
  double snr = 1.0;
  double half_width = 10.0;
  double step = 0.2;

  /// Number of grid points 2*half_width/step; throws if the spec is invalid
  /// or the ratio is not an integer (within 1e-9).
  Eigen::Index grid_size() const;
};

struct LabeledSample {
  std::vector<double> features;
  std::string label;
};

/// 2x2 joint of X ~ Bernoulli(1/2), Y = X xor noise, P(noise = 1) = e.
/// Diagonal cells (1-e)/2, off-diagonal e/2. Requires 0 <= e <= 1/2.
JointDistribution bernoulli_joint(double e);

/// Discretized jointly Gaussian channel X = sqrt(snr) * Y + S on a shared
/// grid x_i = -half_width + (i-1)*step for both axes. Cell (i, k) is
/// rho(y_k) * rho(x_i - sqrt(snr) * y_k) * step^2, globally renormalized.
JointDistribution gaussian_discretized(const GaussianGridSpec& spec);

/// The 4x4 block joint whose IB curve has a constant unit slope: 1/8 on the
/// two 2x2 diagonal blocks, 0 elsewhere.
JointDistribution constant_slope_joint();

/// Empirical joint over distinct feature vectors (X) and labels (Y).
/// Duplicate feature vectors are merged by exact equality; supports are in
/// first-appearance order.
JointDistribution empirical_joint(const std::vector<LabeledSample>& samples);

/// Parses comma-separated rows into samples, taking label_column (zero-based)
/// as the label and every other column as a numeric feature. Blank lines are
/// ignored. Throws std::runtime_error naming the row and token on parse
/// failure, or when no data rows are present.
std::vector<LabeledSample> load_labeled_csv(std::istream& source, int label_column,
                                            bool skip_header = false);

/// Convenience overload reading from a file path.
std::vector<LabeledSample> load_labeled_csv(const std::string& path, int label_column,
                                            bool skip_header = false);

}  // namespace ibot
