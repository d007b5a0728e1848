// Copyright 2026 The fuzzyseg Authors
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

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fuzzyseg/autoseed.hpp"
#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct EigenPairs {
  VectorXd values;   // descending
  MatrixXd vectors;  // n x count
};

MatrixXd squared(const DistanceMatrix& d) {
  const auto n = static_cast<Eigen::Index>(d.n);
  MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = d.values[static_cast<std::size_t>(i * n + j)];
      d2(i, j) = v * v;
    }
  }
  return d2;
}

// -1/2 J D2 J x with J the centering projector.
VectorXd apply_b(const MatrixXd& d2, const VectorXd& x) {
  const VectorXd y = x.array() - x.mean();
  VectorXd z = d2 * y;
  z.array() -= z.mean();
  return -0.5 * z;
}

EigenPairs dense_top(const MatrixXd& d2, int dim) {
  const auto n = d2.rows();
  const VectorXd row_mean = d2.rowwise().mean();
  const double grand = row_mean.mean();
  MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (d2(i, j) - row_mean(i) - row_mean(j) + grand);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kDegenerateMatrix, "eigensolver failed");
  EigenPairs out;
  out.values.resize(dim);
  out.vectors.resize(n, dim);
  for (int k = 0; k < dim; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

// Lanczos with full reorthogonalization, growing the Krylov space until the
// top `dim` Ritz pairs have small residuals.
EigenPairs lanczos_top(const MatrixXd& d2, int dim) {
  const auto n = d2.rows();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = uni(rng);
  const double scale = std::max(1.0, d2.cwiseAbs().maxCoeff());

  Eigen::Index steps = std::min<Eigen::Index>(n, 2 * dim + 40);
  for (;;) {
    MatrixXd v(n, steps);
    VectorXd alpha = VectorXd::Zero(steps);
    VectorXd beta = VectorXd::Zero(steps);
    v.col(0) = start.normalized();
    Eigen::Index m = steps;
    double last_beta = 0.0;
    for (Eigen::Index j = 0; j < steps; ++j) {
      VectorXd w = apply_b(d2, v.col(j));
      alpha(j) = v.col(j).dot(w);
      for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
      const double b = w.norm();
      last_beta = b;
      if (j + 1 == steps) break;
      if (b <= 1e-12 * scale) {
        m = j + 1;
        last_beta = 0.0;
        break;
      }
      beta(j) = b;
      v.col(j + 1) = w / b;
    }
    MatrixXd t = MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(t);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kDegenerateMatrix, "eigensolver failed");
    const int found = static_cast<int>(std::min<Eigen::Index>(dim, m));
    bool converged = true;
    for (int k = 0; k < found; ++k) {
      const double theta = solver.eigenvalues()(m - 1 - k);
      const double residual = std::abs(last_beta * solver.eigenvectors()(m - 1, m - 1 - k));
      if (residual > 1e-10 * std::max(std::abs(theta), scale)) converged = false;
    }
    if (converged || m < steps || steps == n) {
      EigenPairs out;
      out.values = VectorXd::Zero(dim);
      out.vectors = MatrixXd::Zero(n, dim);
      for (int k = 0; k < found; ++k) {
        out.values(k) = solver.eigenvalues()(m - 1 - k);
        out.vectors.col(k) = (v.leftCols(m) * solver.eigenvectors().col(m - 1 - k)).normalized();
      }
      return out;
    }
    steps = std::min<Eigen::Index>(n, steps * 2);
  }
}

}  // namespace

Embedding mds_embed(const DistanceMatrix& d, int dim, std::size_t dense_limit) {
  if (dim < 1) throw Error(ErrorCode::kInvalidConfig, "embedding dimension must be >= 1");
  if (d.values.size() != d.n * d.n) throw Error(ErrorCode::kDimensionMismatch, "distance matrix is not square");
  if (d.n < static_cast<std::size_t>(dim) + 1) {
    throw Error(ErrorCode::kDegenerateMatrix,
                "need at least " + std::to_string(dim + 1) + " points, got " + std::to_string(d.n));
  }
  for (double v : d.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kDegenerateMatrix, "distance matrix has a non-finite entry");
  }
  const MatrixXd d2 = squared(d);
  const EigenPairs pairs = d.n <= dense_limit ? dense_top(d2, dim) : lanczos_top(d2, dim);

  Embedding e;
  e.n = d.n;
  e.dim = dim;
  e.coords.assign(d.n * static_cast<std::size_t>(dim), 0.0);
  e.eigenvalues.assign(static_cast<std::size_t>(dim), 0.0);
  for (int k = 0; k < dim; ++k) {
    const double lambda = std::max(pairs.values(k), 0.0);
    e.eigenvalues[static_cast<std::size_t>(k)] = lambda;
    const double root = std::sqrt(lambda);
    VectorXd axis = pairs.vectors.col(k) * root;
    Eigen::Index biggest = 0;
    for (Eigen::Index i = 1; i < axis.size(); ++i) {
      if (std::abs(axis(i)) > std::abs(axis(biggest))) biggest = i;
    }
    if (axis(biggest) < 0.0) axis = -axis;
    for (std::size_t i = 0; i < d.n; ++i) {
      e.coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] = axis(static_cast<Eigen::Index>(i));
    }
  }
  return e;
}

}  // namespace fuzzyseg
