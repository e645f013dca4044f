#include "pfm/neural.hpp"

#include <cmath>
#include <stdexcept>

namespace pfm::nn {

Mat uniform_init(int rows, int cols, double limit, Rng& rng) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = rng.uniform(-limit, limit);
    }
  }
  return m;
}

namespace {

Mat apply_act(const Mat& z, Act act) {
  switch (act) {
    case Act::Relu:
      return z.cwiseMax(0.0);
    case Act::Sigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Act::Identity:
      return z;
  }
  return z;
}

// Derivative expressed through the activation output.
Mat act_grad_from_output(const Mat& dy, const Mat& y, Act act) {
  switch (act) {
    case Act::Relu:
      return (dy.array() * (y.array() > 0.0).cast<double>()).matrix();
    case Act::Sigmoid:
      return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Act::Identity:
      return dy;
  }
  return dy;
}

}  // namespace

Dense::Dense(int in, int out, Act act, Rng& rng) : act(act) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(in));
  W = uniform_init(out, in, limit, rng);
  b = Mat::Zero(out, 1);
  gW = Mat::Zero(out, in);
  gb = Mat::Zero(out, 1);
}

Mat Dense::forward(const Mat& x) {
  if (x.rows() != W.cols()) {
    throw std::invalid_argument("dense: input rows " + std::to_string(x.rows()) +
                                " != " + std::to_string(W.cols()));
  }
  x_ = x;
  Mat z = W * x;
  z.colwise() += b.col(0);
  y_ = apply_act(z, act);
  return y_;
}

Mat Dense::backward(const Mat& dy) {
  if (dy.rows() != W.rows() || dy.cols() != x_.cols()) {
    throw std::invalid_argument("dense backward: shape mismatch");
  }
  Mat dz = act_grad_from_output(dy, y_, act);
  gW += dz * x_.transpose();
  gb += dz.rowwise().sum();
  return W.transpose() * dz;
}

void Dense::zero_grad() {
  gW.setZero();
  gb.setZero();
}

std::vector<Param> Dense::params(const std::string& prefix) {
  return {{prefix + ".W", &W, &gW}, {prefix + ".b", &b, &gb}};
}

Lstm::Lstm(int input_size, int hidden_size, Rng& rng)
    : input_size(input_size), hidden_size(hidden_size) {
  const double wlim = 1.0 / std::sqrt(static_cast<double>(input_size));
  const double ulim = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  W = uniform_init(4 * hidden_size, input_size, wlim, rng);
  U = uniform_init(4 * hidden_size, hidden_size, ulim, rng);
  b = Mat::Zero(4 * hidden_size, 1);
  b.block(hidden_size, 0, hidden_size, 1).setConstant(1.0);  // forget gate
  gW = Mat::Zero(W.rows(), W.cols());
  gU = Mat::Zero(U.rows(), U.cols());
  gb = Mat::Zero(b.rows(), 1);
}

std::vector<Mat> Lstm::forward(const std::vector<Mat>& x_seq, const Mat& h0,
                               const Mat& c0) {
  const int H = hidden_size;
  const Eigen::Index B =
      !x_seq.empty() ? x_seq.front().cols()
                     : (h0.size() > 0 ? h0.cols() : Eigen::Index{1});
  Mat h = h0.size() > 0 ? h0 : Mat::Zero(H, B);
  Mat c = c0.size() > 0 ? c0 : Mat::Zero(H, B);

  xs_ = x_seq;
  hs_.assign(1, h);
  cs_.assign(1, c);
  gi_.clear(); gf_.clear(); gg_.clear(); go_.clear(); tc_.clear();

  std::vector<Mat> outputs;
  outputs.reserve(x_seq.size());
  for (const Mat& x : x_seq) {
    if (x.rows() != input_size) {
      throw std::invalid_argument("lstm: input rows " + std::to_string(x.rows()) +
                                  " != " + std::to_string(input_size));
    }
    Mat z = W * x + U * h;
    z.colwise() += b.col(0);
    Mat i = (1.0 / (1.0 + (-z.topRows(H).array()).exp())).matrix();
    Mat f = (1.0 / (1.0 + (-z.middleRows(H, H).array()).exp())).matrix();
    Mat g = z.middleRows(2 * H, H).array().tanh().matrix();
    Mat o = (1.0 / (1.0 + (-z.bottomRows(H).array()).exp())).matrix();

    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    Mat tanh_c = c.array().tanh().matrix();
    h = (o.array() * tanh_c.array()).matrix();

    gi_.push_back(std::move(i));
    gf_.push_back(std::move(f));
    gg_.push_back(std::move(g));
    go_.push_back(std::move(o));
    tc_.push_back(std::move(tanh_c));
    hs_.push_back(h);
    cs_.push_back(c);
    outputs.push_back(h);
  }
  return outputs;
}

std::vector<Mat> Lstm::backward(const std::vector<Mat>& dh_seq) {
  const int H = hidden_size;
  const std::size_t T = xs_.size();
  if (dh_seq.size() != T) {
    throw std::invalid_argument("lstm backward: sequence length mismatch");
  }
  std::vector<Mat> dx_seq(T);
  if (T == 0) return dx_seq;

  const Eigen::Index B = xs_.front().cols();
  Mat dh_next = Mat::Zero(H, B);  // recurrent carry
  Mat dc_next = Mat::Zero(H, B);

  for (std::size_t t = T; t-- > 0;) {
    const Mat& i = gi_[t];
    const Mat& f = gf_[t];
    const Mat& g = gg_[t];
    const Mat& o = go_[t];
    const Mat& tanh_c = tc_[t];
    const Mat& c_prev = cs_[t];

    Mat dh = dh_seq[t] + dh_next;
    Mat dc = dc_next +
             (dh.array() * o.array() * (1.0 - tanh_c.array().square())).matrix();

    Mat dzo = (dh.array() * tanh_c.array() * o.array() * (1.0 - o.array())).matrix();
    Mat dzi = (dc.array() * g.array() * i.array() * (1.0 - i.array())).matrix();
    Mat dzg = (dc.array() * i.array() * (1.0 - g.array().square())).matrix();
    Mat dzf = (dc.array() * c_prev.array() * f.array() * (1.0 - f.array())).matrix();
    dc_next = (dc.array() * f.array()).matrix();

    Mat dz(4 * H, B);
    dz.topRows(H) = dzi;
    dz.middleRows(H, H) = dzf;
    dz.middleRows(2 * H, H) = dzg;
    dz.bottomRows(H) = dzo;

    gW += dz * xs_[t].transpose();
    gU += dz * hs_[t].transpose();
    gb += dz.rowwise().sum();

    dx_seq[t] = W.transpose() * dz;
    dh_next = U.transpose() * dz;
  }
  return dx_seq;
}

void Lstm::zero_grad() {
  gW.setZero();
  gU.setZero();
  gb.setZero();
}

std::vector<Param> Lstm::params(const std::string& prefix) {
  return {{prefix + ".W", &W, &gW},
          {prefix + ".U", &U, &gU},
          {prefix + ".b", &b, &gb}};
}

Dropout::Dropout(double rate) : rate(rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout rate must be in [0,1)");
  }
}

Mat Dropout::forward(const Mat& x, bool training, Rng* rng) {
  if (!training || rate == 0.0) {
    active_ = false;
    return x;
  }
  if (rng == nullptr) {
    throw std::invalid_argument("dropout: training mode needs an rng");
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  mask_.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      mask_(i, j) = rng->uniform() < rate ? 0.0 : keep_scale;
    }
  }
  active_ = true;
  return x.cwiseProduct(mask_);
}

Mat Dropout::backward(const Mat& dy) const {
  if (!active_) return dy;
  return dy.cwiseProduct(mask_);
}

HuberResult huber_loss(const Mat& target, const Mat& pred, double delta) {
  if (target.rows() != pred.rows() || target.cols() != pred.cols()) {
    throw std::invalid_argument("huber: shape mismatch");
  }
  const double n = static_cast<double>(pred.size());
  HuberResult out;
  out.grad.resize(pred.rows(), pred.cols());
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      const double d = pred(i, j) - target(i, j);
      if (std::abs(d) <= delta) {
        out.loss += 0.5 * d * d;
        out.grad(i, j) = d / n;
      } else {
        out.loss += delta * std::abs(d) - 0.5 * delta * delta;
        out.grad(i, j) = (d > 0.0 ? delta : -delta) / n;
      }
    }
  }
  out.loss /= n;
  return out;
}

void Adam::step(const std::vector<Param>& params) {
  if (m_.empty()) {
    for (const Param& p : params) {
      m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
  }
  if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter list changed size");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Mat& g = *params[k].grad;
    m_[k] = beta1 * m_[k] + (1.0 - beta1) * g;
    v_[k] = (beta2 * v_[k].array() + (1.0 - beta2) * g.array().square()).matrix();
    params[k].value->array() -=
        lr * (m_[k].array() / bc1) / ((v_[k].array() / bc2).sqrt() + eps);
  }
}

void soft_update(const std::vector<Param>& online,
                 const std::vector<Param>& target, double tau) {
  if (online.size() != target.size()) {
    throw std::invalid_argument("soft_update: parameter count mismatch");
  }
  for (std::size_t k = 0; k < online.size(); ++k) {
    if (online[k].value->rows() != target[k].value->rows() ||
        online[k].value->cols() != target[k].value->cols()) {
      throw std::invalid_argument("soft_update: shape mismatch at " +
                                  online[k].name);
    }
    *target[k].value = tau * (*online[k].value) + (1.0 - tau) * (*target[k].value);
  }
}

GradCheckReport grad_check(const std::vector<Param>& params,
                           const std::function<double()>& loss_fn,
                           double fd_eps, long long max_checks_per_block) {
  GradCheckReport report;
  for (const Param& p : params) {
    GradCheckBlock block;
    block.name = p.name;
    Mat analytic = *p.grad;  // snapshot; loss_fn may overwrite grads
    const long long total = static_cast<long long>(p.value->size());
    const long long stride =
        max_checks_per_block > 0 && total > max_checks_per_block
            ? (total + max_checks_per_block - 1) / max_checks_per_block
            : 1;
    for (long long flat = 0; flat < total; flat += stride) {
      {
        const Eigen::Index i =
            static_cast<Eigen::Index>(flat) % p.value->rows();
        const Eigen::Index j =
            static_cast<Eigen::Index>(flat) / p.value->rows();
        const double saved = (*p.value)(i, j);
        auto central = [&](double eps) {
          (*p.value)(i, j) = saved + eps;
          const double lp = loss_fn();
          (*p.value)(i, j) = saved - eps;
          const double lm = loss_fn();
          (*p.value)(i, j) = saved;
          return (lp - lm) / (2.0 * eps);
        };
        const double numeric = central(fd_eps);
        const double half = central(0.5 * fd_eps);
        // Two-scale agreement: at a smooth point the central estimates differ
        // by O(eps^2); a large gap means the window straddles a kink (relu /
        // huber knee) and the finite difference is meaningless there.
        if (std::abs(numeric - half) >
            1e-4 * std::max(std::abs(numeric), std::abs(half)) + 1e-8) {
          continue;
        }
        const double a = analytic(i, j);
        const double rel = std::abs(a - numeric) /
                           std::max({std::abs(a), std::abs(numeric), 1e-8});
        if (rel > block.max_rel_err) block.max_rel_err = rel;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace pfm::nn
