#include "egotopo/nn.hpp"

#include <cmath>
#include <functional>

#include "egotopo/common.hpp"

namespace egotopo::nn {

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
  EGOTOPO_CHECK(widths_.size() >= 2, "mlp needs at least one layer");
  int count = 0;
  for (int l = 0; l + 1 < static_cast<int>(widths_.size()); ++l)
    count += widths_[l] * widths_[l + 1] + widths_[l + 1];
  theta_ = Vec::Zero(count);
}

int Mlp::weight_offset(int layer) const {
  int off = 0;
  for (int l = 0; l < layer; ++l) off += widths_[l] * widths_[l + 1] + widths_[l + 1];
  return off;
}

int Mlp::bias_offset(int layer) const {
  return weight_offset(layer) + widths_[layer] * widths_[layer + 1];
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
  return {theta_.data() + weight_offset(layer), widths_[layer], widths_[layer + 1]};
}

Eigen::Map<const Vec> Mlp::bias(int layer) const {
  return {theta_.data() + bias_offset(layer), widths_[layer + 1]};
}

Eigen::Map<Mat> Mlp::weight_mut(int layer) {
  return {theta_.data() + weight_offset(layer), widths_[layer], widths_[layer + 1]};
}

Eigen::Map<Vec> Mlp::bias_mut(int layer) {
  return {theta_.data() + bias_offset(layer), widths_[layer + 1]};
}

void Mlp::init_params(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    double scale = std::sqrt(2.0 / widths_[l]);
    auto w = weight_mut(l);
    for (int j = 0; j < w.cols(); ++j)
      for (int i = 0; i < w.rows(); ++i) w(i, j) = scale * rng.gaussian();
    bias_mut(l).setZero();
  }
}

Mat Mlp::forward(const Mat& x) const {
  Cache c;
  return forward(x, c);
}

Mat Mlp::forward(const Mat& x, Cache& cache) const {
  EGOTOPO_CHECK(x.cols() == widths_.front(), "mlp input width mismatch");
  cache.acts.clear();
  cache.acts.reserve(widths_.size());
  cache.acts.push_back(x);
  Mat h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Mat z = (h * weight(l)).rowwise() + bias(l).transpose();
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    cache.acts.push_back(z);
    h = std::move(z);
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Mat& dlogits, Vec& grad,
                   Mat* dinput) const {
  EGOTOPO_CHECK(grad.size() == theta_.size(), "gradient buffer size mismatch");
  Mat delta = dlogits;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) {
      // ReLU mask from stored post-activation of this layer.
      delta = delta.cwiseProduct(
          (cache.acts[l + 1].array() > 0.0).cast<double>().matrix());
    }
    const Mat& a = cache.acts[l];
    Eigen::Map<Mat> gw(grad.data() + weight_offset(l), widths_[l], widths_[l + 1]);
    Eigen::Map<Vec> gb(grad.data() + bias_offset(l), widths_[l + 1]);
    gw += a.transpose() * delta;
    gb += delta.colwise().sum().transpose();
    if (l > 0 || dinput != nullptr) delta = delta * weight(l).transpose();
    if (l == 0 && dinput != nullptr) *dinput = delta;
  }
}

Adam::Adam(int param_count, AdamConfig cfg)
    : cfg_(cfg), m_(Vec::Zero(param_count)), v_(Vec::Zero(param_count)) {}

void Adam::step(Vec& params, const Vec& grad) {
  ++t_;
  Vec g = grad;
  if (cfg_.weight_decay != 0.0) g += cfg_.weight_decay * params;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * g;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  Vec mhat = m_ / bc1;
  Vec vhat = v_ / bc2;
  params -= cfg_.lr * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                         Vec::Constant(params.size(), cfg_.eps));
}

double bce_with_logits(const Mat& logits, const Mat& targets, Mat* dlogits) {
  EGOTOPO_CHECK(logits.rows() == targets.rows() && logits.cols() == targets.cols(),
                "bce shape mismatch");
  double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      double z = logits(i, j), y = targets(i, j);
      loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  loss /= n * static_cast<double>(logits.cols());
  if (dlogits) {
    *dlogits = (sigmoid(logits) - targets) / (n * static_cast<double>(logits.cols()));
  }
  return loss;
}

double masked_bce_with_logits(const Mat& logits, const Mat& targets,
                              const Mat& mask, Mat* dlogits) {
  EGOTOPO_CHECK(logits.rows() == targets.rows() && logits.cols() == targets.cols() &&
                    logits.rows() == mask.rows() && logits.cols() == mask.cols(),
                "masked bce shape mismatch");
  double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      double z = logits(i, j), y = targets(i, j);
      loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  loss /= n;
  if (dlogits) {
    *dlogits = (sigmoid(logits) - targets).cwiseProduct(mask) / n;
  }
  return loss;
}

Mat sigmoid(const Mat& z) {
  Mat out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) out(i, j) = sigmoid(z(i, j));
  return out;
}

double gradient_check(const std::function<double(const Vec&)>& f, const Vec& theta,
                      const Vec& analytic, double step) {
  Vec fd(theta.size());
  Vec t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double orig = t(i);
    t(i) = orig + step;
    double hi = f(t);
    t(i) = orig - step;
    double lo = f(t);
    t(i) = orig;
    fd(i) = (hi - lo) / (2.0 * step);
  }
  double denom = std::max(analytic.norm() + fd.norm(), 1e-10);
  return (analytic - fd).norm() / denom;
}

}  // namespace egotopo::nn
