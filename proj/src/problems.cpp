#include "ibot/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ibot {

namespace {

double std_normal_pdf(double x) {
  static const double kNorm = 1.0 / std::sqrt(2.0 * M_PI);
  return kNorm * std::exp(-0.5 * x * x);
}

}  // namespace

Eigen::Index GaussianGridSpec::grid_size() const {
  if (!(snr > 0.0) || !(half_width > 0.0) || !(step > 0.0))
    throw std::domain_error("GaussianGridSpec: snr, half_width, step must be positive");
  const double n = 2.0 * half_width / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9)
    throw std::domain_error("GaussianGridSpec: 2*half_width/step is not an integer");
  return static_cast<Eigen::Index>(rounded);
}

JointDistribution bernoulli_joint(double e) {
  if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("bernoulli_joint: e outside [0, 1/2]");
  Eigen::MatrixXd pxy(2, 2);
  pxy << (1.0 - e) / 2.0, e / 2.0,
         e / 2.0, (1.0 - e) / 2.0;
  return JointDistribution(std::move(pxy));
}

JointDistribution gaussian_discretized(const GaussianGridSpec& spec) {
  const Eigen::Index n = spec.grid_size();
  Eigen::VectorXd grid(n);
  for (Eigen::Index i = 0; i < n; ++i)
    grid[i] = -spec.half_width + static_cast<double>(i) * spec.step;

  const double root_snr = std::sqrt(spec.snr);
  Eigen::MatrixXd pxy(n, n);  // (i, k): X = x_i, Y = y_k
  for (Eigen::Index k = 0; k < n; ++k) {
    const double py = std_normal_pdf(grid[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      pxy(i, k) = py * std_normal_pdf(grid[i] - root_snr * grid[k]);
  }
  pxy *= spec.step * spec.step;
  pxy /= pxy.sum();
  return JointDistribution(std::move(pxy));
}

JointDistribution constant_slope_joint() {
  Eigen::MatrixXd pxy = Eigen::MatrixXd::Zero(4, 4);
  pxy.block(0, 0, 2, 2).setConstant(1.0 / 8.0);
  pxy.block(2, 2, 2, 2).setConstant(1.0 / 8.0);
  return JointDistribution(std::move(pxy));
}

JointDistribution empirical_joint(const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_joint: no samples");

  std::map<std::vector<double>, Eigen::Index> x_index;
  std::map<std::string, Eigen::Index> y_index;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  cells.reserve(samples.size());
  Eigen::Index next_x = 0, next_y = 0;
  for (const auto& s : samples) {
    auto [xi, x_new] = x_index.try_emplace(s.features, next_x);
    if (x_new) ++next_x;
    auto [yi, y_new] = y_index.try_emplace(s.label, next_y);
    if (y_new) ++next_y;
    cells.emplace_back(xi->second, yi->second);
  }

  Eigen::MatrixXd pxy = Eigen::MatrixXd::Zero(next_x, next_y);
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (auto [i, k] : cells) pxy(i, k) += unit;
  return JointDistribution(std::move(pxy));
}

std::vector<LabeledSample> load_labeled_csv(std::istream& source, int label_column,
                                            bool skip_header) {
  std::vector<LabeledSample> samples;
  std::string line;
  int row = 0;
  bool header_pending = skip_header;
  while (std::getline(source, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }

    LabeledSample sample;
    std::stringstream ss(line);
    std::string token;
    int col = 0;
    bool have_label = false;
    while (std::getline(ss, token, ',')) {
      if (col == label_column) {
        if (token.empty())
          throw std::runtime_error("load_labeled_csv: empty label at row " + std::to_string(row));
        sample.label = token;
        have_label = true;
      } else {
        double value = 0.0;
        const char* begin = token.data();
        const char* end = begin + token.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr != end)
          throw std::runtime_error("load_labeled_csv: bad number '" + token + "' at row " +
                                   std::to_string(row));
        sample.features.push_back(value);
      }
      ++col;
    }
    if (!have_label)
      throw std::runtime_error("load_labeled_csv: missing label column at row " +
                               std::to_string(row));
    if (sample.features.empty())
      throw std::runtime_error("load_labeled_csv: no feature columns at row " +
                               std::to_string(row));
    samples.push_back(std::move(sample));
  }
  if (samples.empty()) throw std::runtime_error("load_labeled_csv: no data rows");
  return samples;
}

std::vector<LabeledSample> load_labeled_csv(const std::string& path, int label_column,
                                            bool skip_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_labeled_csv: cannot open " + path);
  return load_labeled_csv(in, label_column, skip_header);
}

}  // namespace ibot
