#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "pfm/rng.hpp"

namespace pfm::nn {

using Mat = Eigen::MatrixXd;  // columns are batch samples

enum class Act { Relu, Sigmoid, Identity };

/// Named view onto a parameter block and its gradient accumulator.
struct Param {
  std::string name;
  Mat* value;
  Mat* grad;
};

/// Fully connected layer, y = act(W x + b). Forward caches the activation
/// so backward can be called once per forward.
class Dense {
 public:
  Dense(int in, int out, Act act, Rng& rng);

  Mat forward(const Mat& x);
  /// Accumulates gW/gb, returns gradient w.r.t. the input.
  Mat backward(const Mat& dy);

  void zero_grad();
  std::vector<Param> params(const std::string& prefix);

  Mat W, b;    // b is out x 1
  Mat gW, gb;
  Act act;

 private:
  Mat x_, y_;
};

/// Standard LSTM cell unrolled over a sequence. Gate rows are stacked
/// [input; forget; candidate; output], each hidden_size tall. Weights are
/// uniform +-1/sqrt(fan_in), forget-gate bias +1.
class Lstm {
 public:
  Lstm(int input_size, int hidden_size, Rng& rng);

  /// Returns the hidden state at every timestep. h0/c0 default to zero when
  /// empty. A zero-length sequence returns no outputs and preserves state.
  std::vector<Mat> forward(const std::vector<Mat>& x_seq, const Mat& h0 = {},
                           const Mat& c0 = {});
  /// dh_seq holds the loss gradient w.r.t. each emitted hidden state.
  /// Accumulates parameter gradients, returns gradients w.r.t. each input.
  std::vector<Mat> backward(const std::vector<Mat>& dh_seq);

  const Mat& last_h() const { return hs_.back(); }
  const Mat& last_c() const { return cs_.back(); }

  void zero_grad();
  std::vector<Param> params(const std::string& prefix);

  int input_size, hidden_size;
  Mat W, U, b;     // 4H x in, 4H x H, 4H x 1
  Mat gW, gU, gb;

 private:
  std::vector<Mat> xs_, hs_, cs_;          // hs_/cs_ include the initial state
  std::vector<Mat> gi_, gf_, gg_, go_, tc_;
};

/// Inverted dropout: training zeroes entries with the given probability and
/// scales survivors by 1/(1-rate); evaluation is exactly the identity.
class Dropout {
 public:
  explicit Dropout(double rate);

  Mat forward(const Mat& x, bool training, Rng* rng);
  Mat backward(const Mat& dy) const;

  double rate;

 private:
  Mat mask_;
  bool active_ = false;
};

struct HuberResult {
  double loss = 0.0;
  Mat grad;  // dL/dpred, mean over elements, clamped at +-delta
};

/// Elementwise Huber loss averaged over the batch.
HuberResult huber_loss(const Mat& target, const Mat& pred, double delta = 1.0);

/// Adam with bias correction. Moment buffers are sized lazily from the first
/// step, so one optimizer instance is bound to one parameter list.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr(lr), beta1(beta1), beta2(beta2), eps(eps) {}

  void step(const std::vector<Param>& params);

  double lr, beta1, beta2, eps;
  long long t = 0;

 private:
  std::vector<Mat> m_, v_;
};

void soft_update(const std::vector<Param>& online,
                 const std::vector<Param>& target, double tau);

struct GradCheckBlock {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_err = 0.0;
};

/// Central finite differences against the analytic gradients currently held
/// in the param blocks. loss_fn must re-run the forward pass at the current
/// parameter values (dropout disabled). Failures are reported, not thrown.
/// Entries whose finite-difference window straddles a kink (detected by
/// two-scale disagreement) are skipped. max_checks_per_block > 0 checks an
/// evenly strided subset of each block, which bounds the cost on large
/// layers.
GradCheckReport grad_check(const std::vector<Param>& params,
                           const std::function<double()>& loss_fn,
                           double fd_eps = 1e-4,
                           long long max_checks_per_block = 0);

Mat uniform_init(int rows, int cols, double limit, Rng& rng);

}  // namespace pfm::nn
