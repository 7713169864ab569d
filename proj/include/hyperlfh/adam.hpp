#pragma once

#include <cmath>
#include <vector>

#include "hyperlfh/matrix.hpp"
#include "hyperlfh/params.hpp"

namespace hyperlfh {

/// Adam with bias correction. beta1=0.9, beta2=0.999, eps=1e-8.
template <typename T>
class AdamState {
 public:
  explicit AdamState(const ParamStore<T>& params) {
    m_.reserve(params.count());
    v_.reserve(params.count());
    for (std::size_t i = 0; i < params.count(); ++i) {
      m_.emplace_back(params.value(i).rows(), params.value(i).cols());
      v_.emplace_back(params.value(i).rows(), params.value(i).cols());
    }
  }

  long step_count() const { return t_; }

  /// One update over the whole store; grads[i] pairs with params.value(i).
  void step(ParamStore<T>& params, const std::vector<Mat<T>>& grads, T lr) {
    if (lr <= T(0)) throw std::invalid_argument("adam_step: lr must be positive");
    ++t_;
    const T b1 = T(0.9), b2 = T(0.999), eps = T(1e-8);
    const T c1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), t_));
    const T c2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), t_));
    for (std::size_t i = 0; i < params.count(); ++i) {
      Mat<T>& p = params.value(i);
      const Mat<T>& g = grads[i];
      Mat<T>&m = m_[i], &v = v_[i];
      for (std::size_t k = 0; k < p.size(); ++k) {
        m.at(k) = b1 * m.at(k) + (T(1) - b1) * g.at(k);
        v.at(k) = b2 * v.at(k) + (T(1) - b2) * g.at(k) * g.at(k);
        const T mhat = m.at(k) / c1;
        const T vhat = v.at(k) / c2;
        p.at(k) -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

 private:
  std::vector<Mat<T>> m_, v_;
  long t_ = 0;
};

/// Single-parameter convenience form.
template <typename T>
void adam_step(Mat<T>& param, const Mat<T>& grad, Mat<T>& m, Mat<T>& v, long& t, T lr) {
  if (lr <= T(0)) throw std::invalid_argument("adam_step: lr must be positive");
  ++t;
  const T b1 = T(0.9), b2 = T(0.999), eps = T(1e-8);
  const T c1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), t));
  const T c2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), t));
  for (std::size_t k = 0; k < param.size(); ++k) {
    m.at(k) = b1 * m.at(k) + (T(1) - b1) * grad.at(k);
    v.at(k) = b2 * v.at(k) + (T(1) - b2) * grad.at(k) * grad.at(k);
    param.at(k) -= lr * (m.at(k) / c1) / (std::sqrt(v.at(k) / c2) + eps);
  }
}

}  // namespace hyperlfh
