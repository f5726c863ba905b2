// Copyright 2026 The merakit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "subsystem_ops.hpp"

#include "merakit/errors.hpp"

namespace merakit::internal {

namespace {

void check_pos(const Register& reg, int p) {
  if (p < 0 || p >= static_cast<int>(reg.dims.size())) {
    throw ArgumentError("subsystem position out of range");
  }
}

}  // namespace

Register::Register(std::vector<int> d) : dims(std::move(d)) {
  place.assign(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) {
    place[static_cast<std::size_t>(i)] =
        place[static_cast<std::size_t>(i + 1)] * dims[static_cast<std::size_t>(i + 1)];
  }
  for (int d_i : dims) {
    if (d_i <= 0) throw ShapeError("register dims must be positive");
    total *= d_i;
  }
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXcd tensor_matrix(const Tensor& t, int n_row_axes) {
  if (n_row_axes < 0 || n_row_axes > t.rank()) {
    throw ArgumentError("row axis count out of range");
  }
  Eigen::Index rows = 1, cols = 1;
  for (int i = 0; i < t.rank(); ++i) {
    if (i < n_row_axes) {
      rows *= t.dim(i);
    } else {
      cols *= t.dim(i);
    }
  }
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = t.data()[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return m;
}

Eigen::MatrixXcd mult_subsystem_left(const Eigen::MatrixXcd& m, const Register& reg,
                                     int p, const Eigen::MatrixXcd& a) {
  check_pos(reg, p);
  int d_in = reg.dims[static_cast<std::size_t>(p)];
  if (m.rows() != reg.total) throw ShapeError("matrix rows do not match register");
  if (a.cols() != d_in) throw ShapeError("transform cols do not match subsystem dim");
  Eigen::Index d_out = a.rows();
  std::int64_t stride = reg.place[static_cast<std::size_t>(p)];
  std::int64_t outer = reg.total / (stride * d_in);  // index above p
  Eigen::MatrixXcd out(outer * d_out * stride, m.cols());
  for (std::int64_t hi = 0; hi < outer; ++hi) {
    for (std::int64_t lo = 0; lo < stride; ++lo) {
      std::int64_t in_base = hi * d_in * stride + lo;
      std::int64_t out_base = hi * d_out * stride + lo;
      for (Eigen::Index r = 0; r < d_out; ++r) {
        Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m.cols());
        for (int k = 0; k < d_in; ++k) {
          if (a(r, k) != cplx(0.0, 0.0)) {
            acc += a(r, k) * m.row(in_base + k * stride);
          }
        }
        out.row(out_base + r * stride) = acc;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd mult_subsystem_right(const Eigen::MatrixXcd& m, const Register& reg,
                                      int p, const Eigen::MatrixXcd& b) {
  check_pos(reg, p);
  int d_in = reg.dims[static_cast<std::size_t>(p)];
  if (m.cols() != reg.total) throw ShapeError("matrix cols do not match register");
  if (b.rows() != d_in) throw ShapeError("transform rows do not match subsystem dim");
  Eigen::Index d_out = b.cols();
  std::int64_t stride = reg.place[static_cast<std::size_t>(p)];
  std::int64_t outer = reg.total / (stride * d_in);
  Eigen::MatrixXcd out(m.rows(), outer * d_out * stride);
  for (std::int64_t hi = 0; hi < outer; ++hi) {
    for (std::int64_t lo = 0; lo < stride; ++lo) {
      std::int64_t in_base = hi * d_in * stride + lo;
      std::int64_t out_base = hi * d_out * stride + lo;
      for (Eigen::Index c = 0; c < d_out; ++c) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m.rows());
        for (int k = 0; k < d_in; ++k) {
          if (b(k, c) != cplx(0.0, 0.0)) {
            acc += b(k, c) * m.col(in_base + k * stride);
          }
        }
        out.col(out_base + c * stride) = acc;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd conjugate_subsystem(const Eigen::MatrixXcd& m, const Register& reg,
                                     int p, const Eigen::MatrixXcd& v) {
  Eigen::MatrixXcd half = mult_subsystem_left(m, reg, p, v);
  return mult_subsystem_right(half, reg, p, Eigen::MatrixXcd(v.adjoint()));
}

Eigen::MatrixXcd sandwich_subsystem(const Eigen::MatrixXcd& m, const Register& reg,
                                    int p, const Eigen::MatrixXcd& v) {
  Eigen::MatrixXcd half = mult_subsystem_left(m, reg, p, Eigen::MatrixXcd(v.adjoint()));
  return mult_subsystem_right(half, reg, p, v);
}

namespace {

// Shared digit loop for two-subsystem gate application. `left` selects
// whether g multiplies the row or the column register.
Eigen::MatrixXcd gate2_pass(const Eigen::MatrixXcd& m, const Register& reg, int pa,
                            int pb, const Eigen::MatrixXcd& g, bool left) {
  check_pos(reg, pa);
  check_pos(reg, pb);
  if (pa == pb) throw ArgumentError("gate positions must be distinct");
  int da = reg.dims[static_cast<std::size_t>(pa)];
  int db = reg.dims[static_cast<std::size_t>(pb)];
  if (g.rows() != g.cols() || g.rows() != static_cast<Eigen::Index>(da) * db) {
    throw ShapeError("gate dim does not match the two subsystems");
  }
  if ((left ? m.rows() : m.cols()) != reg.total) {
    throw ShapeError("matrix does not match register");
  }
  std::int64_t place_a = reg.place[static_cast<std::size_t>(pa)];
  std::int64_t place_b = reg.place[static_cast<std::size_t>(pb)];

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
  for (std::int64_t f = 0; f < reg.total; ++f) {
    int fa = static_cast<int>((f / place_a) % da);
    int fb = static_cast<int>((f / place_b) % db);
    std::int64_t rest = f - fa * place_a - fb * place_b;
    if (left) {
      // out.row(f) = sum_{ka,kb} g[(fa,fb),(ka,kb)] m.row(rest + ka, kb)
      Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m.cols());
      for (int ka = 0; ka < da; ++ka) {
        for (int kb = 0; kb < db; ++kb) {
          cplx coeff = g(fa * db + fb, ka * db + kb);
          if (coeff != cplx(0.0, 0.0)) {
            acc += coeff * m.row(rest + ka * place_a + kb * place_b);
          }
        }
      }
      out.row(f) = acc;
    } else {
      // out.col(f) = sum_{ka,kb} m.col(rest + ka, kb) g[(ka,kb),(fa,fb)]
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m.rows());
      for (int ka = 0; ka < da; ++ka) {
        for (int kb = 0; kb < db; ++kb) {
          cplx coeff = g(ka * db + kb, fa * db + fb);
          if (coeff != cplx(0.0, 0.0)) {
            acc += coeff * m.col(rest + ka * place_a + kb * place_b);
          }
        }
      }
      out.col(f) = acc;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd mult_gate2_left(const Eigen::MatrixXcd& m, const Register& reg,
                                 int pa, int pb, const Eigen::MatrixXcd& g) {
  return gate2_pass(m, reg, pa, pb, g, true);
}

Eigen::MatrixXcd mult_gate2_right(const Eigen::MatrixXcd& m, const Register& reg,
                                  int pa, int pb, const Eigen::MatrixXcd& g) {
  return gate2_pass(m, reg, pa, pb, g, false);
}

Eigen::MatrixXcd conjugate_gate2(const Eigen::MatrixXcd& m, const Register& reg,
                                 int pa, int pb, const Eigen::MatrixXcd& g) {
  return mult_gate2_right(mult_gate2_left(m, reg, pa, pb, g), reg, pa, pb,
                          Eigen::MatrixXcd(g.adjoint()));
}

Eigen::MatrixXcd sandwich_gate2(const Eigen::MatrixXcd& m, const Register& reg,
                                int pa, int pb, const Eigen::MatrixXcd& g) {
  return mult_gate2_right(
      mult_gate2_left(m, reg, pa, pb, Eigen::MatrixXcd(g.adjoint())), reg, pa, pb, g);
}

Eigen::MatrixXcd trace_out(const Eigen::MatrixXcd& m, const Register& reg, int p) {
  check_pos(reg, p);
  if (m.rows() != reg.total || m.cols() != reg.total) {
    throw ShapeError("matrix does not match register");
  }
  int d = reg.dims[static_cast<std::size_t>(p)];
  std::int64_t stride = reg.place[static_cast<std::size_t>(p)];
  std::int64_t outer = reg.total / (stride * d);
  std::int64_t new_total = reg.total / d;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(new_total, new_total);

  auto old_flat = [&](std::int64_t reduced, int k) {
    std::int64_t hi = reduced / stride;
    std::int64_t lo = reduced % stride;
    return hi * d * stride + k * stride + lo;
  };
  (void)outer;
  for (std::int64_t r = 0; r < new_total; ++r) {
    for (std::int64_t c = 0; c < new_total; ++c) {
      cplx acc(0.0, 0.0);
      for (int k = 0; k < d; ++k) acc += m(old_flat(r, k), old_flat(c, k));
      out(r, c) = acc;
    }
  }
  return out;
}

Eigen::MatrixXcd embed_on(const Eigen::MatrixXcd& op, const std::vector<int>& positions,
                          const Register& reg) {
  std::int64_t d_op = 1;
  for (int p : positions) {
    check_pos(reg, p);
    d_op *= reg.dims[static_cast<std::size_t>(p)];
  }
  if (op.rows() != d_op || op.cols() != d_op) {
    throw ShapeError("operator dim does not match the chosen subsystems");
  }
  std::vector<std::int64_t> op_place;
  for (int p : positions) op_place.push_back(reg.place[static_cast<std::size_t>(p)]);
  std::vector<int> op_dims;
  for (int p : positions) op_dims.push_back(reg.dims[static_cast<std::size_t>(p)]);

  auto digits_of = [&](std::int64_t flat) {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < op_place.size(); ++i) {
      idx = idx * op_dims[i] + static_cast<int>((flat / op_place[i]) % op_dims[i]);
    }
    return idx;
  };
  auto rest_of = [&](std::int64_t flat) {
    for (std::size_t i = 0; i < op_place.size(); ++i) {
      flat -= ((flat / op_place[i]) % op_dims[i]) * op_place[i];
    }
    return flat;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(reg.total, reg.total);
  for (std::int64_t r = 0; r < reg.total; ++r) {
    std::int64_t r_op = digits_of(r);
    std::int64_t r_rest = rest_of(r);
    for (std::int64_t c_op = 0; c_op < d_op; ++c_op) {
      cplx v = op(r_op, c_op);
      if (v == cplx(0.0, 0.0)) continue;
      // rebuild the column index with the op digits replaced
      std::int64_t c = r_rest;
      std::int64_t tmp = c_op;
      for (int i = static_cast<int>(op_place.size()) - 1; i >= 0; --i) {
        c += (tmp % op_dims[static_cast<std::size_t>(i)]) * op_place[static_cast<std::size_t>(i)];
        tmp /= op_dims[static_cast<std::size_t>(i)];
      }
      out(r, c) = v;
    }
  }
  return out;
}

Eigen::MatrixXcd permute_subsystems(const Eigen::MatrixXcd& op,
                                    const std::vector<int>& dims,
                                    const std::vector<int>& order) {
  Register in(dims);
  if (order.size() != dims.size()) throw ArgumentError("permutation length mismatch");
  std::vector<int> new_dims;
  for (int o : order) {
    if (o < 0 || o >= static_cast<int>(dims.size())) {
      throw ArgumentError("permutation entry out of range");
    }
    new_dims.push_back(dims[static_cast<std::size_t>(o)]);
  }
  Register out_reg(new_dims);
  if (op.rows() != in.total || op.cols() != in.total) {
    throw ShapeError("operator does not match register");
  }
  // map: new flat index -> old flat index
  std::vector<std::int64_t> remap(static_cast<std::size_t>(in.total));
  for (std::int64_t nf = 0; nf < out_reg.total; ++nf) {
    std::int64_t of = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      int digit = static_cast<int>((nf / out_reg.place[k]) % out_reg.dims[k]);
      of += digit * in.place[static_cast<std::size_t>(order[k])];
    }
    remap[static_cast<std::size_t>(nf)] = of;
  }
  Eigen::MatrixXcd out(in.total, in.total);
  for (std::int64_t r = 0; r < in.total; ++r) {
    for (std::int64_t c = 0; c < in.total; ++c) {
      out(r, c) = op(remap[static_cast<std::size_t>(r)], remap[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

}  // namespace merakit::internal
