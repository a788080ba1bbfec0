#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "egotopo/rng.hpp"

namespace egotopo::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Fully connected net with ReLU between layers and a linear final layer.
// Parameters live in one flat vector so optimizers and finite-difference
// checks can treat the model as a plain function of theta.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> widths);

  void init_params(Rng& rng);  // He-style init

  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  int param_count() const { return static_cast<int>(theta_.size()); }
  Vec& params() { return theta_; }
  const Vec& params() const { return theta_; }

  // Inference: rows of x are samples, returns batch x output logits.
  Mat forward(const Mat& x) const;

  struct Cache {
    std::vector<Mat> acts;  // acts[0] = input, acts[l] = post-activation of layer l
  };
  Mat forward(const Mat& x, Cache& cache) const;

  // Accumulates dL/dtheta into grad given dL/dlogits; optionally returns
  // dL/dinput. grad must be sized param_count().
  void backward(const Cache& cache, const Mat& dlogits, Vec& grad,
                Mat* dinput = nullptr) const;

  // Parameter block views into the flat vector.
  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<const Vec> bias(int layer) const;
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }

 private:
  Eigen::Map<Mat> weight_mut(int layer);
  Eigen::Map<Vec> bias_mut(int layer);
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;

  std::vector<int> widths_;
  Vec theta_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // classic L2-coupled decay, added to the gradient
};

class Adam {
 public:
  Adam(int param_count, AdamConfig cfg);
  void step(Vec& params, const Vec& grad);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  std::int64_t t_ = 0;
};

// Numerically stable elementwise binary cross entropy on logits.
// loss per element: max(z,0) - z*y + log(1 + exp(-|z|)).
double bce_with_logits(const Mat& logits, const Mat& targets, Mat* dlogits);

// Masked variant: per-sample loss is the sum over unmasked classes, batch
// loss is the mean over samples. A fully masked sample contributes zero.
double masked_bce_with_logits(const Mat& logits, const Mat& targets,
                              const Mat& mask, Mat* dlogits);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Mat sigmoid(const Mat& z);

// Relative error between an analytic gradient and a central finite-difference
// gradient of f at theta: ||a - b|| / max(||a|| + ||b||, floor).
double gradient_check(const std::function<double(const Vec&)>& f, const Vec& theta,
                      const Vec& analytic, double step = 1e-6);

}  // namespace egotopo::nn
