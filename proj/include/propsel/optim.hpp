#pragma once

#include "propsel/tensor.hpp"

#include <vector>

namespace propsel {

void zero_grads(const ParameterRefs& params);
void scale_grads(const ParameterRefs& params, double factor);
double global_grad_norm(const ParameterRefs& params);

struct ClipResult {
  double norm_before = 0.0;
  double norm_after = 0.0;
  bool clipped = false;
};

/// Rescales all gradients jointly so their global L2 norm is at most `max_norm`.
ClipResult clip_by_global_norm(const ParameterRefs& params, double max_norm);

class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  /// The parameter list must be the same (same order) on every call.
  void step(const ParameterRefs& params);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace propsel
