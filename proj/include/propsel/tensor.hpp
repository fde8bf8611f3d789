#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace propsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

using ParameterRefs = std::vector<Parameter*>;

Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng);

/// Glorot/Xavier uniform.
Matrix glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Square orthogonal matrix from the QR factorisation of a Gaussian draw.
Matrix orthogonal_init(Eigen::Index n, Rng& rng);

/// Inverted-dropout mask: each entry is 0 with probability `rate`,
/// otherwise 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

bool all_finite(const Matrix& m);

}  // namespace propsel
