// Copyright 2026 The Fabrica Authors
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

// Independent reference computations for the unit tests. These avoid the
// library's Eigen-based code paths: plain loops over std::vector.

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fabrica/core.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline Rows rows(const fabrica::Mat& M) {
  Rows r(M.rows(), std::vector<double>(M.cols()));
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) r[i][j] = M(i, j);
  return r;
}

// Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Rows A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    if (A[p][c] == 0.0) throw std::runtime_error("singular");
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

inline fabrica::Vec gauss_solve(const fabrica::Mat& A, const fabrica::Vec& b) {
  const auto x = gauss_solve(rows(A), std::vector<double>(b.data(), b.data() + b.size()));
  return fabrica::Vec::Map(x.data(), static_cast<int>(x.size()));
}

inline fabrica::Mat gauss_inverse(const fabrica::Mat& A) {
  const int n = static_cast<int>(A.rows());
  fabrica::Mat out(n, n);
  for (int i = 0; i < n; ++i) out.col(i) = gauss_solve(A, fabrica::Vec::Unit(n, i));
  return out;
}

inline fabrica::Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  fabrica::Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline fabrica::Mat random_mat(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  fabrica::Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// A A^T + shift I, well conditioned.
inline fabrica::Mat random_spd(std::mt19937_64& rng, int n, double shift = 0.5) {
  const fabrica::Mat A = random_mat(rng, n, n);
  return A * A.transpose() + shift * fabrica::Mat::Identity(n, n);
}

inline double max_abs(const fabrica::Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
