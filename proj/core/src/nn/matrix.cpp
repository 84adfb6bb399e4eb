/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gpuperf/nn/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace gpuperf::nn {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out) {
  if (x.cols() != w.cols() || bias.size() != w.rows()) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  const std::size_t n = x.rows();
  const std::size_t in = w.cols();
  const std::size_t outd = w.rows();
  if (out.rows() != n || out.cols() != outd) out = Matrix(n, outd);

  // Four samples per pass share each weight row and keep four independent
  // accumulation chains; summation order per element stays fixed.
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* x0 = x.row(i).data();
    const double* x1 = x.row(i + 1).data();
    const double* x2 = x.row(i + 2).data();
    const double* x3 = x.row(i + 3).data();
    for (std::size_t o = 0; o < outd; ++o) {
      const double* wr = w.row(o).data();
      double a0 = bias[o], a1 = bias[o], a2 = bias[o], a3 = bias[o];
      for (std::size_t k = 0; k < in; ++k) {
        const double wk = wr[k];
        a0 += x0[k] * wk;
        a1 += x1[k] * wk;
        a2 += x2[k] * wk;
        a3 += x3[k] * wk;
      }
      out(i, o) = a0;
      out(i + 1, o) = a1;
      out(i + 2, o) = a2;
      out(i + 3, o) = a3;
    }
  }
  for (; i < n; ++i) {
    const double* xr = x.row(i).data();
    for (std::size_t o = 0; o < outd; ++o) {
      const double* wr = w.row(o).data();
      double a = bias[o];
      for (std::size_t k = 0; k < in; ++k) a += xr[k] * wr[k];
      out(i, o) = a;
    }
  }
}

void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dout, Matrix& dw,
                     std::span<double> dbias, Matrix* dx) {
  const std::size_t n = x.rows();
  const std::size_t in = w.cols();
  const std::size_t outd = w.rows();
  if (dout.rows() != n || dout.cols() != outd || dw.rows() != outd || dw.cols() != in ||
      dbias.size() != outd) {
    throw std::invalid_argument("affine_backward: shape mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* xr = x.row(i).data();
    const double* dr = dout.row(i).data();
    for (std::size_t o = 0; o < outd; ++o) {
      const double g = dr[o];
      dbias[o] += g;
      if (g == 0.0) continue;
      double* dwr = dw.row(o).data();
      for (std::size_t k = 0; k < in; ++k) dwr[k] += g * xr[k];
    }
  }
  if (dx) {
    if (dx->rows() != n || dx->cols() != in) *dx = Matrix(n, in);
    dx->fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dr = dout.row(i).data();
      double* dxr = dx->row(i).data();
      for (std::size_t o = 0; o < outd; ++o) {
        const double g = dr[o];
        if (g == 0.0) continue;
        const double* wr = w.row(o).data();
        for (std::size_t k = 0; k < in; ++k) dxr[k] += g * wr[k];
      }
    }
  }
}

}  // namespace gpuperf::nn
