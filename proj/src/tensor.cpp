#include "propsel/tensor.hpp"

#include "propsel/errors.hpp"

#include <cmath>
#include <sstream>

namespace propsel {

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::ostringstream out;
        out << "invalid configuration";
        for (const auto& p : problems) out << "\n  - " << p;
        return out.str();
      }()),
      problems_(std::move(problems)) {}

Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

Matrix glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double scale = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_init(rows, cols, scale, rng);
}

Matrix orthogonal_init(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = dist(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  // Fix column signs so the draw is unique given the Gaussian sample.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  if (rate <= 0.0) return Matrix::Ones(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = keep(rng) ? scale : 0.0;
  return m;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace propsel
