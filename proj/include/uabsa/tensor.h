// Copyright 2026 The uabsa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UABSA_TENSOR_H_
#define UABSA_TENSOR_H_

// Minimal dense row-major matrix and the handful of kernels the encoder
// needs. Everything is templated on the scalar so the same model code runs
// in float for training and in double for gradient checking.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace uabsa {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const T &operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  T *row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const T *row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }

  void set_zero() { std::fill(data_.begin(), data_.end(), T(0)); }
  void resize(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<size_t>(rows) * cols, T(0));
  }

  friend bool operator==(const Matrix &, const Matrix &) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// out (+)= a * b
template <typename T>
void matmul(const Matrix<T> &a, const Matrix<T> &b, Matrix<T> &out,
            bool accumulate = false) {
  assert(a.cols() == b.rows());
  if (!accumulate) out.resize(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    T *__restrict o = out.row(i);
    const T *ai = a.row(i);
    for (int p = 0; p < k; ++p) {
      const T s = ai[p];
      const T *__restrict bp = b.row(p);
      for (int j = 0; j < m; ++j) o[j] += s * bp[j];
    }
  }
}

// out (+)= a^T * b
template <typename T>
void matmul_at_b(const Matrix<T> &a, const Matrix<T> &b, Matrix<T> &out,
                 bool accumulate = false) {
  assert(a.rows() == b.rows());
  if (!accumulate) out.resize(a.cols(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int r = 0; r < n; ++r) {
    const T *ar = a.row(r);
    const T *__restrict br = b.row(r);
    for (int i = 0; i < k; ++i) {
      const T s = ar[i];
      T *__restrict o = out.row(i);
      for (int j = 0; j < m; ++j) o[j] += s * br[j];
    }
  }
}

// out (+)= a * b^T
template <typename T>
void matmul_a_bt(const Matrix<T> &a, const Matrix<T> &b, Matrix<T> &out,
                 bool accumulate = false) {
  assert(a.cols() == b.cols());
  Matrix<T> bt(b.cols(), b.rows());
  for (int r = 0; r < b.rows(); ++r) {
    const T *br = b.row(r);
    for (int c = 0; c < b.cols(); ++c) bt(c, r) = br[c];
  }
  matmul(a, bt, out, accumulate);
}

// x[r, :] += bias[0, :]
template <typename T>
void add_row_bias(Matrix<T> &x, const Matrix<T> &bias) {
  for (int r = 0; r < x.rows(); ++r) {
    T *xr = x.row(r);
    for (int c = 0; c < x.cols(); ++c) xr[c] += bias(0, c);
  }
}

// db[0, :] += sum_r dy[r, :]
template <typename T>
void accumulate_col_sums(const Matrix<T> &dy, Matrix<T> &db) {
  for (int r = 0; r < dy.rows(); ++r) {
    const T *yr = dy.row(r);
    for (int c = 0; c < dy.cols(); ++c) db(0, c) += yr[c];
  }
}

template <typename T>
void add_inplace(Matrix<T> &x, const Matrix<T> &y) {
  auto xv = x.values();
  auto yv = y.values();
  for (size_t i = 0; i < xv.size(); ++i) xv[i] += yv[i];
}

// Numerically stable softmax over a contiguous row, in place.
template <typename T>
void softmax_inplace(T *v, int n) {
  T mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  T sum = 0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - mx);
    sum += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= sum;
}

template <typename T>
int argmax(const T *v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

template <typename T>
bool all_finite(const Matrix<T> &m) {
  for (T v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Layer normalisation over each row: y = gamma * (x - mean) / std + beta.
template <typename T>
struct LayerNormCache {
  Matrix<T> xhat;
  std::vector<T> inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

template <typename T>
void layer_norm(const Matrix<T> &x, const Matrix<T> &gamma,
                const Matrix<T> &beta, Matrix<T> &y, LayerNormCache<T> *cache) {
  const int n = x.rows(), d = x.cols();
  y.resize(n, d);
  if (cache) {
    cache->xhat.resize(n, d);
    cache->inv_std.assign(n, T(0));
  }
  for (int r = 0; r < n; ++r) {
    const T *xr = x.row(r);
    T mean = 0;
    for (int c = 0; c < d; ++c) mean += xr[c];
    mean /= d;
    T var = 0;
    for (int c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= d;
    const T inv = T(1) / std::sqrt(var + T(kLayerNormEps));
    T *yr = y.row(r);
    for (int c = 0; c < d; ++c) {
      const T xh = (xr[c] - mean) * inv;
      if (cache) cache->xhat(r, c) = xh;
      yr[c] = gamma(0, c) * xh + beta(0, c);
    }
    if (cache) cache->inv_std[r] = inv;
  }
}

// Accumulates dgamma/dbeta and writes (or adds, when accumulate) dx.
template <typename T>
void layer_norm_backward(const Matrix<T> &dy, const LayerNormCache<T> &cache,
                         const Matrix<T> &gamma, Matrix<T> &dgamma,
                         Matrix<T> &dbeta, Matrix<T> &dx, bool accumulate) {
  const int n = dy.rows(), d = dy.cols();
  if (!accumulate) dx.resize(n, d);
  std::vector<T> dxhat(d);
  for (int r = 0; r < n; ++r) {
    const T *dyr = dy.row(r);
    const T *xh = cache.xhat.row(r);
    T mean_dxhat = 0, mean_dxhat_xhat = 0;
    for (int c = 0; c < d; ++c) {
      dgamma(0, c) += dyr[c] * xh[c];
      dbeta(0, c) += dyr[c];
      dxhat[c] = dyr[c] * gamma(0, c);
      mean_dxhat += dxhat[c];
      mean_dxhat_xhat += dxhat[c] * xh[c];
    }
    mean_dxhat /= d;
    mean_dxhat_xhat /= d;
    T *dxr = dx.row(r);
    for (int c = 0; c < d; ++c) {
      dxr[c] += cache.inv_std[r] * (dxhat[c] - mean_dxhat - xh[c] * mean_dxhat_xhat);
    }
  }
}

// tanh approximation of GELU and its derivative.
template <typename T>
T gelu(T u) {
  constexpr T c = T(0.7978845608028654);
  return T(0.5) * u * (T(1) + std::tanh(c * (u + T(0.044715) * u * u * u)));
}

template <typename T>
T gelu_grad(T u) {
  constexpr T c = T(0.7978845608028654);
  const T t = std::tanh(c * (u + T(0.044715) * u * u * u));
  return T(0.5) * (T(1) + t) +
         T(0.5) * u * (T(1) - t * t) * c * (T(1) + T(3 * 0.044715) * u * u);
}

}  // namespace uabsa

#endif  // UABSA_TENSOR_H_
