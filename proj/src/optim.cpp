#include "propsel/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace propsel {

void zero_grads(const ParameterRefs& params) {
  for (auto* p : params) p->zero_grad();
}

void scale_grads(const ParameterRefs& params, double factor) {
  for (auto* p : params) p->grad *= factor;
}

double global_grad_norm(const ParameterRefs& params) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

ClipResult clip_by_global_norm(const ParameterRefs& params, double max_norm) {
  ClipResult r;
  r.norm_before = global_grad_norm(params);
  r.norm_after = r.norm_before;
  if (r.norm_before > max_norm) {
    scale_grads(params, max_norm / r.norm_before);
    r.norm_after = global_grad_norm(params);
    r.clipped = true;
  }
  return r;
}

void Adam::step(const ParameterRefs& params) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam::step: parameter list changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

}  // namespace propsel
