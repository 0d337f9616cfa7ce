// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "tdmda/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdmda::ad {

std::size_t numel(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) os << 'x';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

double Tensor::scalar() const
{
    if (size() != 1)
        throw std::invalid_argument("scalar() on tensor of shape " + shape_str(shape));
    return (*data)[0];
}

std::size_t Tensor::rows() const
{
    return shape.size() == 2 ? shape[0] : 1;
}

std::size_t Tensor::cols() const
{
    if (shape.empty()) return 1;
    return shape.back();
}

Tensor constant(Shape shape, std::vector<double> values)
{
    if (numel(shape) != values.size())
        throw std::invalid_argument("constant: shape " + shape_str(shape) + " does not match "
                                    + std::to_string(values.size()) + " values");
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<double>>(std::move(values));
    return t;
}

Tensor full(Shape shape, double value)
{
    std::vector<double> v(numel(shape), value);
    return constant(std::move(shape), std::move(v));
}

Tensor Tape::leaf(Shape shape, std::shared_ptr<const std::vector<double>> values,
                  bool requires_grad)
{
    if (numel(shape) != values->size())
        throw std::invalid_argument("leaf: shape " + shape_str(shape) + " does not match "
                                    + std::to_string(values->size()) + " values");
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::move(values);
    if (requires_grad) {
        t.tape = this;
        t.requires_grad = true;
        nodes_.push_back(Node{t.shape, {}, {}});
        t.node = static_cast<int>(nodes_.size()) - 1;
    }
    return t;
}

Tensor Tape::leaf(Shape shape, std::vector<double> values, bool requires_grad)
{
    return leaf(std::move(shape),
                std::make_shared<const std::vector<double>>(std::move(values)), requires_grad);
}

int Tape::record(Shape out_shape, std::vector<int> input_nodes, BackwardFn fn)
{
    nodes_.push_back(Node{std::move(out_shape), std::move(input_nodes), std::move(fn)});
    return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& grad_buffer(Tape::GradMap& grads, int node, std::size_t n)
{
    auto& g = grads[static_cast<std::size_t>(node)];
    if (g.empty()) g.assign(n, 0.0);
    return g;
}

Tape::GradMap Tape::backward(const Tensor& root) const
{
    if (root.node < 0 || root.tape == nullptr)
        throw std::invalid_argument("backward: root is detached from the tape");
    if (root.tape != this)
        throw std::invalid_argument("backward: root belongs to a different tape");
    if (root.size() != 1)
        throw std::invalid_argument("backward: root must be scalar, got shape "
                                    + shape_str(root.shape));
    GradMap grads(nodes_.size());
    grads[static_cast<std::size_t>(root.node)] = {1.0};
    for (int id = root.node; id >= 0; --id) {
        const auto& g = grads[static_cast<std::size_t>(id)];
        if (g.empty()) continue;  // not reachable from the root
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.backward) n.backward(g, grads);
    }
    return grads;
}

namespace {

// Resolves the tape for an op and checks that all graph-attached inputs
// agree on it. Returns nullptr when nothing requires a gradient.
Tape* resolve_tape(std::initializer_list<const Tensor*> inputs)
{
    Tape* tape = nullptr;
    for (const Tensor* t : inputs) {
        if (!t->requires_grad) continue;
        if (t->tape == nullptr)
            throw std::logic_error("tensor requires grad but has no tape");
        if (tape != nullptr && tape != t->tape)
            throw std::invalid_argument("operation mixes tensors from different tapes");
        tape = t->tape;
    }
    return tape;
}

Tensor finish(Shape shape, std::vector<double> values,
              std::initializer_list<const Tensor*> inputs, Tape::BackwardFn fn)
{
    Tensor out;
    out.shape = std::move(shape);
    out.data = std::make_shared<const std::vector<double>>(std::move(values));
    Tape* tape = resolve_tape(inputs);
    if (tape != nullptr) {
        std::vector<int> ids;
        for (const Tensor* t : inputs)
            if (t->node >= 0) ids.push_back(t->node);
        out.tape = tape;
        out.requires_grad = true;
        out.node = tape->record(out.shape, std::move(ids), std::move(fn));
    }
    return out;
}

int grad_node(const Tensor& t)
{
    return t.requires_grad ? t.node : -1;
}

void require_same_shape(const char* kind, const Tensor& a, const Tensor& b)
{
    if (a.shape != b.shape)
        throw std::invalid_argument(std::string(kind) + ": shape mismatch "
                                    + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

void require_rank2(const char* kind, const Tensor& t)
{
    if (t.shape.size() != 2)
        throw std::invalid_argument(std::string(kind) + ": expected rank-2 tensor, got "
                                    + shape_str(t.shape));
}

// Applies fn to each contiguous or strided 1-d slice along `axis`.
template <typename Fn>
void for_each_slice(const Shape& shape, std::size_t axis, Fn&& fn)
{
    if (shape.size() == 1) {
        fn(0 /*offset*/, 1 /*stride*/, shape[0]);
        return;
    }
    const std::size_t n = shape[0], d = shape[1];
    if (axis == 1) {
        for (std::size_t r = 0; r < n; ++r) fn(r * d, 1, d);
    } else {
        for (std::size_t c = 0; c < d; ++c) fn(c, d, n);
    }
}

void check_axis(const char* kind, const Tensor& t, std::size_t axis)
{
    if (t.shape.empty() || t.shape.size() > 2)
        throw std::invalid_argument(std::string(kind) + ": expected rank 1 or 2, got "
                                    + shape_str(t.shape));
    if (axis >= t.shape.size())
        throw std::invalid_argument(std::string(kind) + ": axis " + std::to_string(axis)
                                    + " out of range for " + shape_str(t.shape));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b)
{
    require_rank2("matmul", a);
    require_rank2("matmul", b);
    const std::size_t n = a.shape[0], k = a.shape[1];
    const std::size_t bk = transpose_b ? b.shape[1] : b.shape[0];
    const std::size_t m = transpose_b ? b.shape[0] : b.shape[1];
    if (k != bk)
        throw std::invalid_argument(std::string("matmul: inner dimension mismatch ")
                                    + shape_str(a.shape) + (transpose_b ? " x T" : " x ")
                                    + shape_str(b.shape));
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(n * m, 0.0);
    if (!transpose_b) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = av[i * k + p];
                if (aip == 0.0) continue;
                const double* brow = bv.data() + p * m;
                double* orow = out.data() + i * m;
                for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
            }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double* arow = av.data() + i * k;
                const double* brow = bv.data() + j * k;
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
                out[i * m + j] = acc;
            }
    }
    const int ia = grad_node(a), ib = grad_node(b);
    auto adata = a.data;
    auto bdata = b.data;
    return finish({n, m}, std::move(out), {&a, &b},
                  [ia, ib, adata, bdata, n, k, m, transpose_b](const std::vector<double>& g,
                                                               Tape::GradMap& grads) {
                      if (ia >= 0) {
                          auto& ga = grad_buffer(grads, ia, n * k);
                          // dA = G * B^T (or G * B when B was transposed)
                          for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t p = 0; p < k; ++p) {
                                  double acc = 0.0;
                                  for (std::size_t j = 0; j < m; ++j) {
                                      const double bval = transpose_b ? (*bdata)[j * k + p]
                                                                      : (*bdata)[p * m + j];
                                      acc += g[i * m + j] * bval;
                                  }
                                  ga[i * k + p] += acc;
                              }
                      }
                      if (ib >= 0) {
                          auto& gb = grad_buffer(grads, ib, k * m);
                          for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < m; ++j) {
                                  const double gij = g[i * m + j];
                                  if (gij == 0.0) continue;
                                  for (std::size_t p = 0; p < k; ++p) {
                                      const double aval = (*adata)[i * k + p];
                                      if (transpose_b)
                                          gb[j * k + p] += gij * aval;
                                      else
                                          gb[p * m + j] += gij * aval;
                                  }
                              }
                      }
                  });
}

Tensor add(const Tensor& a, const Tensor& b)
{
    const bool broadcast = a.shape.size() == 2 && b.shape.size() == 1
                           && a.shape[1] == b.shape[0];
    if (!broadcast) require_same_shape("add", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    if (broadcast) {
        const std::size_t n = a.shape[0], d = a.shape[1];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] = av[i * d + j] + bv[j];
    } else {
        for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    }
    const int ia = grad_node(a), ib = grad_node(b);
    const std::size_t na = av.size(), nb = bv.size();
    const Shape ashape = a.shape;
    return finish(a.shape, std::move(out), {&a, &b},
                  [ia, ib, na, nb, broadcast, ashape](const std::vector<double>& g,
                                                      Tape::GradMap& grads) {
                      if (ia >= 0) {
                          auto& ga = grad_buffer(grads, ia, na);
                          for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                      }
                      if (ib >= 0) {
                          auto& gb = grad_buffer(grads, ib, nb);
                          if (broadcast) {
                              const std::size_t n = ashape[0], d = ashape[1];
                              for (std::size_t i = 0; i < n; ++i)
                                  for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
                          } else {
                              for (std::size_t i = 0; i < nb; ++i) gb[i] += g[i];
                          }
                      }
                  });
}

Tensor subtract(const Tensor& a, const Tensor& b)
{
    require_same_shape("subtract", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
    const int ia = grad_node(a), ib = grad_node(b);
    const std::size_t n = av.size();
    return finish(a.shape, std::move(out), {&a, &b},
                  [ia, ib, n](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ia >= 0) {
                          auto& ga = grad_buffer(grads, ia, n);
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                      }
                      if (ib >= 0) {
                          auto& gb = grad_buffer(grads, ib, n);
                          for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
                      }
                  });
}

Tensor mul(const Tensor& a, const Tensor& b)
{
    require_same_shape("elementwise-multiply", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
    const int ia = grad_node(a), ib = grad_node(b);
    auto adata = a.data;
    auto bdata = b.data;
    const std::size_t n = av.size();
    return finish(a.shape, std::move(out), {&a, &b},
                  [ia, ib, adata, bdata, n](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ia >= 0) {
                          auto& ga = grad_buffer(grads, ia, n);
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * (*bdata)[i];
                      }
                      if (ib >= 0) {
                          auto& gb = grad_buffer(grads, ib, n);
                          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * (*adata)[i];
                      }
                  });
}

namespace {

// Shared scaffolding for unary elementwise ops: forward map plus a
// backward factor computed from the input value.
template <typename FwdFn, typename DFn>
Tensor unary_op(const Tensor& x, FwdFn fwd, DFn dfdx)
{
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
    const int ix = grad_node(x);
    auto xdata = x.data;
    const std::size_t n = xv.size();
    return finish(x.shape, std::move(out), {&x},
                  [ix, xdata, n, dfdx](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, n);
                      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * dfdx((*xdata)[i]);
                  });
}

}  // namespace

Tensor neg(const Tensor& x)
{
    return unary_op(x, [](double v) { return -v; }, [](double) { return -1.0; });
}

Tensor relu(const Tensor& x)
{
    return unary_op(x, [](double v) { return v > 0.0 ? v : 0.0; },
                    [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x)
{
    return unary_op(x, [](double v) { return std::exp(v); },
                    [](double v) { return std::exp(v); });
}

Tensor log(const Tensor& x)
{
    for (double v : x.values())
        if (v <= 0.0)
            throw std::domain_error("log: non-positive input " + std::to_string(v)
                                    + " (clamp probabilities first)");
    return unary_op(x, [](double v) { return std::log(v); },
                    [](double v) { return 1.0 / v; });
}

Tensor sigmoid(const Tensor& x)
{
    return unary_op(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
                    [](double v) {
                        const double s = 1.0 / (1.0 + std::exp(-v));
                        return s * (1.0 - s);
                    });
}

Tensor square(const Tensor& x)
{
    return unary_op(x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Tensor scale(const Tensor& x, double c)
{
    return unary_op(x, [c](double v) { return c * v; }, [c](double) { return c; });
}

Tensor select_positive(const Tensor& x, double floor_value)
{
    return unary_op(x, [floor_value](double v) { return v >= 0.0 ? v : floor_value; },
                    [](double v) { return v >= 0.0 ? 1.0 : 0.0; });
}

Tensor clamp(const Tensor& x, double lo, double hi)
{
    if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
    return unary_op(x, [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
                    [lo, hi](double v) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor grad_reverse(const Tensor& x, double lambda)
{
    if (lambda < 0.0) throw std::invalid_argument("grad_reverse: lambda must be nonnegative");
    return unary_op(x, [](double v) { return v; }, [lambda](double) { return -lambda; });
}

Tensor dropout_apply(const Tensor& x, const std::vector<double>& mask)
{
    if (mask.size() != x.size())
        throw std::invalid_argument("dropout-apply: mask size " + std::to_string(mask.size())
                                    + " does not match tensor " + shape_str(x.shape));
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * mask[i];
    const int ix = grad_node(x);
    const std::size_t n = xv.size();
    return finish(x.shape, std::move(out), {&x},
                  [ix, mask, n](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, n);
                      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * mask[i];
                  });
}

Tensor softmax(const Tensor& x, std::size_t axis)
{
    check_axis("softmax", x, axis);
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for_each_slice(x.shape, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        double mx = xv[off];
        for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, xv[off + i * stride]);
        double denom = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double e = std::exp(xv[off + i * stride] - mx);
            out[off + i * stride] = e;
            denom += e;
        }
        for (std::size_t i = 0; i < len; ++i) out[off + i * stride] /= denom;
    });
    const int ix = grad_node(x);
    const Shape shape = x.shape;
    auto pvals = std::make_shared<const std::vector<double>>(out);
    return finish(x.shape, std::move(out), {&x},
                  [ix, shape, axis, pvals](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, pvals->size());
                      const auto& p = *pvals;
                      for_each_slice(shape, axis,
                                     [&](std::size_t off, std::size_t stride, std::size_t len) {
                                         double dot = 0.0;
                                         for (std::size_t i = 0; i < len; ++i)
                                             dot += g[off + i * stride] * p[off + i * stride];
                                         for (std::size_t i = 0; i < len; ++i) {
                                             const std::size_t k = off + i * stride;
                                             gx[k] += p[k] * (g[k] - dot);
                                         }
                                     });
                  });
}

namespace {

Tensor reduce(const Tensor& x, std::size_t axis, bool take_mean, const char* kind)
{
    check_axis(kind, x, axis);
    const auto& xv = x.values();
    Shape out_shape;
    if (x.shape.size() == 2)
        out_shape = {axis == 1 ? x.shape[0] : x.shape[1]};
    else
        out_shape = {1};
    std::vector<double> out(numel(out_shape), 0.0);
    std::size_t slice_idx = 0;
    for_each_slice(x.shape, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) acc += xv[off + i * stride];
        out[slice_idx++] = take_mean ? acc / static_cast<double>(len) : acc;
    });
    const int ix = grad_node(x);
    const Shape shape = x.shape;
    const std::size_t n = xv.size();
    return finish(std::move(out_shape), std::move(out), {&x},
                  [ix, shape, axis, take_mean, n](const std::vector<double>& g,
                                                  Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, n);
                      std::size_t slice_idx = 0;
                      for_each_slice(shape, axis,
                                     [&](std::size_t off, std::size_t stride, std::size_t len) {
                                         const double gs =
                                             take_mean ? g[slice_idx] / static_cast<double>(len)
                                                       : g[slice_idx];
                                         ++slice_idx;
                                         for (std::size_t i = 0; i < len; ++i)
                                             gx[off + i * stride] += gs;
                                     });
                  });
}

Tensor reduce_all(const Tensor& x, bool take_mean)
{
    const auto& xv = x.values();
    double acc = 0.0;
    for (double v : xv) acc += v;
    if (take_mean) acc /= static_cast<double>(xv.size());
    const int ix = grad_node(x);
    const std::size_t n = xv.size();
    return finish({1}, {acc}, {&x},
                  [ix, n, take_mean](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, n);
                      const double gs = take_mean ? g[0] / static_cast<double>(n) : g[0];
                      for (std::size_t i = 0; i < n; ++i) gx[i] += gs;
                  });
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis) { return reduce(x, axis, false, "sum"); }
Tensor mean(const Tensor& x, std::size_t axis) { return reduce(x, axis, true, "mean"); }
Tensor sum_all(const Tensor& x) { return reduce_all(x, false); }
Tensor mean_all(const Tensor& x) { return reduce_all(x, true); }

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis)
{
    if (a.shape.size() != b.shape.size())
        throw std::invalid_argument("concat: rank mismatch " + shape_str(a.shape) + " vs "
                                    + shape_str(b.shape));
    if (a.shape.size() == 1) {
        if (axis != 0) throw std::invalid_argument("concat: axis out of range for rank 1");
    } else if (a.shape.size() == 2) {
        if (axis > 1) throw std::invalid_argument("concat: axis out of range for rank 2");
        const std::size_t other = 1 - axis;
        if (a.shape[other] != b.shape[other])
            throw std::invalid_argument("concat: shape mismatch " + shape_str(a.shape) + " vs "
                                        + shape_str(b.shape) + " along axis "
                                        + std::to_string(axis));
    } else {
        throw std::invalid_argument("concat: expected rank 1 or 2, got " + shape_str(a.shape));
    }

    const auto& av = a.values();
    const auto& bv = b.values();
    Shape out_shape = a.shape;
    out_shape[axis] += b.shape[axis];
    std::vector<double> out(numel(out_shape));
    const bool rowwise = a.shape.size() == 1 || axis == 0;
    if (rowwise) {
        std::copy(av.begin(), av.end(), out.begin());
        std::copy(bv.begin(), bv.end(), out.begin() + static_cast<std::ptrdiff_t>(av.size()));
    } else {
        const std::size_t n = a.shape[0], da = a.shape[1], db = b.shape[1];
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(av.begin() + static_cast<std::ptrdiff_t>(i * da),
                      av.begin() + static_cast<std::ptrdiff_t>((i + 1) * da),
                      out.begin() + static_cast<std::ptrdiff_t>(i * (da + db)));
            std::copy(bv.begin() + static_cast<std::ptrdiff_t>(i * db),
                      bv.begin() + static_cast<std::ptrdiff_t>((i + 1) * db),
                      out.begin() + static_cast<std::ptrdiff_t>(i * (da + db) + da));
        }
    }
    const int ia = grad_node(a), ib = grad_node(b);
    const std::size_t na = av.size(), nb = bv.size();
    const Shape as = a.shape, bs = b.shape;
    return finish(std::move(out_shape), std::move(out), {&a, &b},
                  [ia, ib, na, nb, as, bs, rowwise](const std::vector<double>& g,
                                                    Tape::GradMap& grads) {
                      if (rowwise) {
                          if (ia >= 0) {
                              auto& ga = grad_buffer(grads, ia, na);
                              for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                          }
                          if (ib >= 0) {
                              auto& gb = grad_buffer(grads, ib, nb);
                              for (std::size_t i = 0; i < nb; ++i) gb[i] += g[na + i];
                          }
                      } else {
                          const std::size_t n = as[0], da = as[1], db = bs[1];
                          if (ia >= 0) {
                              auto& ga = grad_buffer(grads, ia, na);
                              for (std::size_t i = 0; i < n; ++i)
                                  for (std::size_t j = 0; j < da; ++j)
                                      ga[i * da + j] += g[i * (da + db) + j];
                          }
                          if (ib >= 0) {
                              auto& gb = grad_buffer(grads, ib, nb);
                              for (std::size_t i = 0; i < n; ++i)
                                  for (std::size_t j = 0; j < db; ++j)
                                      gb[i * db + j] += g[i * (da + db) + da + j];
                          }
                      }
                  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end)
{
    require_rank2("slice-rows", x);
    const std::size_t n = x.shape[0], d = x.shape[1];
    if (begin > end || end > n)
        throw std::invalid_argument("slice-rows: range [" + std::to_string(begin) + ", "
                                    + std::to_string(end) + ") out of bounds for "
                                    + shape_str(x.shape));
    const auto& xv = x.values();
    std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(begin * d),
                            xv.begin() + static_cast<std::ptrdiff_t>(end * d));
    const int ix = grad_node(x);
    const std::size_t total = xv.size();
    return finish({end - begin, d}, std::move(out), {&x},
                  [ix, begin, end, d, total](const std::vector<double>& g, Tape::GradMap& grads) {
                      if (ix < 0) return;
                      auto& gx = grad_buffer(grads, ix, total);
                      for (std::size_t i = 0; i < (end - begin) * d; ++i)
                          gx[begin * d + i] += g[i];
                  });
}

Tensor detach(const Tensor& t)
{
    Tensor out;
    out.shape = t.shape;
    out.data = t.data;
    return out;
}

}  // namespace tdmda::ad
