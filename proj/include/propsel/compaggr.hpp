#pragma once

#include "propsel/corpus.hpp"
#include "propsel/tensor.hpp"

#include <array>
#include <utility>
#include <vector>

namespace propsel {

struct CompAggrConfig {
  std::vector<int> filter_widths{1, 2, 3, 4, 5};
  int feature_maps = 100;
  /// Two-sided attention with k-max filtering of the attention logits.
  bool kmax = false;
  int k = 3;
};

/// Intermediate values of one soft-alignment call.
struct AlignmentTrace {
  Matrix weights;    // Lx x Ly, column-wise softmax (zeros where k-max masked)
  Matrix projected;  // W X, d x Lx
};

/// X . softmax((W X)^T Y) with the softmax taken over X's positions for each
/// column of Y. A positive `kmax` keeps only the k largest logits per column
/// (ties to the lower index); the rest get zero weight.
Matrix soft_align(const Matrix& context, const Matrix& target, const Matrix& attention, int kmax = 0,
                  AlignmentTrace* trace = nullptr);

/// Question-side alignment A^Q = Q . softmax((W Q)^T S) for question Q (d x Lq)
/// and sentence S (d x Ls).
inline Matrix compaggr_attend(const Matrix& question, const Matrix& sentence, const Matrix& attention) {
  return soft_align(question, sentence, attention);
}

/// Compare-aggregate pair classifier. Output is (p_true, p_false).
class CompAggr {
 public:
  CompAggr(int dim, CompAggrConfig config, Rng& rng);

  struct SideTrace {
    Matrix compared;  // d x L (unpadded)
    AlignmentTrace alignment;
    Matrix padded;                       // d x max(L, widest filter)
    std::vector<std::vector<int>> argmax;  // per width, per map
    std::vector<Vector> pooled;          // per width
  };
  struct Trace {
    Matrix question, sentence;
    std::vector<SideTrace> sides;  // sentence side, then question side (kmax)
    Vector features;
    Vector probabilities;
  };

  const CompAggrConfig& config() const { return config_; }
  int feature_count() const;

  std::array<double, 2> score(const Matrix& question, const Matrix& sentence, Trace* trace = nullptr) const;
  /// Adds parameter gradients given d(loss)/d(logits); returns (dQ, dS).
  std::pair<Matrix, Matrix> backward(const Trace& trace, const Vector& grad_logits);
  void collect_parameters(ParameterRefs& out);

  Parameter attention;                 // d x d
  std::vector<Parameter> filters;      // per width: maps x (d * width)
  std::vector<Parameter> filter_bias;  // per width: maps x 1
  Parameter output;                    // features x 2
  Parameter output_bias;               // 2 x 1

 private:
  Vector convolve(const Matrix& compared, SideTrace& side) const;
  Matrix convolve_backward(const SideTrace& side, const Vector& grad_features, Eigen::Index offset);

  CompAggrConfig config_;
};

/// -sum_i log p(label_i) over question/sentence pairs, class 0 = supporting.
double compaggr_loss(const std::vector<std::array<double, 2>>& predictions, const Labels& labels);

}  // namespace propsel
