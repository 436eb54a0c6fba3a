#include "trajsr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "trajsr/rng.hpp"

namespace trajsr::tensor {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

namespace detail {
void Node::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}
}  // namespace detail

using detail::Node;

namespace {

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
        throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_str(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    return n;
}

void check_finite(const std::vector<double>& v, const char* op) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error(std::string("non-finite value produced by ") + op);
        }
    }
}

// C[m,n] (+)= A[m,k] * B[k,n]
void gemm_nn(size_t m, size_t k, size_t n, const double* A, const double* B, double* C) {
    for (size_t i = 0; i < m; ++i) {
        const double* a = A + i * k;
        double* c = C + i * n;
        for (size_t p = 0; p < k; ++p) {
            double av = a[p];
            if (av == 0.0) continue;
            const double* b = B + p * n;
            for (size_t j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

// C[m,k] += A[m,n] * B^T where B is [k,n]
void gemm_nt(size_t m, size_t n, size_t k, const double* A, const double* B, double* C) {
    for (size_t i = 0; i < m; ++i) {
        const double* a = A + i * n;
        double* c = C + i * k;
        for (size_t p = 0; p < k; ++p) {
            const double* b = B + p * n;
            double acc = 0.0;
            for (size_t j = 0; j < n; ++j) acc += a[j] * b[j];
            c[p] += acc;
        }
    }
}

// C[k,n] += A^T * B where A is [m,k], B is [m,n]
void gemm_tn(size_t m, size_t k, size_t n, const double* A, const double* B, double* C) {
    for (size_t i = 0; i < m; ++i) {
        const double* a = A + i * k;
        const double* b = B + i * n;
        for (size_t p = 0; p < k; ++p) {
            double av = a[p];
            if (av == 0.0) continue;
            double* c = C + p * n;
            for (size_t j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

// true when small is a trailing suffix of big
bool is_suffix_shape(const Shape& big, const Shape& small) {
    if (small.size() > big.size()) return false;
    for (size_t i = 0; i < small.size(); ++i) {
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    }
    return true;
}

}  // namespace

Tensor make_op_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                      const char* op_name, std::function<void(Node&)> backward_fn) {
    check_finite(data, op_name);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p.requires_grad();
    auto n = new_node(std::move(shape), std::move(data), rg);
    if (rg) {
        for (const auto& p : parents) n->parents.push_back(p.shared_node());
        n->backward_fn = std::move(backward_fn);
    }
    return Tensor(n);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto numel = shape_numel(shape);
    return Tensor(new_node(std::move(shape), std::vector<double>(numel, 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto numel = shape_numel(shape);
    return Tensor(new_node(std::move(shape), std::vector<double>(numel, value), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    check_finite(data, "from_data");
    return Tensor(new_node(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
    if (idx.size() != n_->shape.size()) throw std::invalid_argument("at: rank mismatch");
    int64_t off = 0;
    size_t k = 0;
    for (int64_t i : idx) {
        off = off * n_->shape[k] + i;
        ++k;
    }
    return n_->data[static_cast<size_t>(off)];
}

std::vector<double>& Tensor::grad() {
    n_->ensure_grad();
    return n_->grad;
}

const std::vector<double>& Tensor::grad() const {
    if (n_->grad.empty()) throw std::runtime_error("grad not populated");
    return n_->grad;
}

void Tensor::zero_grad() {
    if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                                    shape_str(b.shape()));
    }
    size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(m * n, 0.0);
    gemm_nn(m, k, n, a.data().data(), b.data().data(), out.data());
    Node* an = a.node();
    Node* bn = b.node();
    return make_op_result(
        {static_cast<int64_t>(m), static_cast<int64_t>(n)}, std::move(out), {a, b}, "matmul",
        [an, bn, m, k, n](Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                gemm_nt(m, n, k, self.grad.data(), bn->data.data(), an->grad.data());
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                gemm_tn(m, k, n, an->data.data(), self.grad.data(), bn->grad.data());
            }
        });
}

namespace {

// shared implementation for add/mul with suffix broadcasting
Tensor binary_elementwise(const Tensor& a, const Tensor& b, bool is_add, const char* name) {
    if (!is_suffix_shape(a.shape(), b.shape())) {
        throw std::invalid_argument(std::string(name) + ": shape " + shape_str(b.shape()) +
                                    " is not a trailing suffix of " + shape_str(a.shape()));
    }
    size_t bn_len = b.numel();
    size_t total = a.numel();
    std::vector<double> out(total);
    const auto& av = a.data();
    const auto& bv = b.data();
    if (is_add) {
        for (size_t i = 0; i < total; ++i) out[i] = av[i] + bv[i % bn_len];
    } else {
        for (size_t i = 0; i < total; ++i) out[i] = av[i] * bv[i % bn_len];
    }
    Node* an = a.node();
    Node* bn = b.node();
    return make_op_result(a.shape(), std::move(out), {a, b}, name,
                          [an, bn, bn_len, total, is_add](Node& self) {
                              if (an->requires_grad) {
                                  an->ensure_grad();
                                  for (size_t i = 0; i < total; ++i) {
                                      an->grad[i] += is_add ? self.grad[i]
                                                            : self.grad[i] * bn->data[i % bn_len];
                                  }
                              }
                              if (bn->requires_grad) {
                                  bn->ensure_grad();
                                  for (size_t i = 0; i < total; ++i) {
                                      bn->grad[i % bn_len] += is_add
                                                                  ? self.grad[i]
                                                                  : self.grad[i] * an->data[i];
                                  }
                              }
                          });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, true, "add"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, false, "mul"); }

Tensor add_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.data());
    for (double& x : out) x += c;
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "add_scalar", [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    });
}

Tensor mul_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.data());
    for (double& x : out) x *= c;
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "mul_scalar", [an, c](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * c;
    });
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& x : out) x = x > 0.0 ? x : 0.0;
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "relu", [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            if (an->data[i] > 0.0) an->grad[i] += self.grad[i];
        }
    });
}

Tensor gelu(const Tensor& a) {
    const double inv_sqrt2 = 0.7071067811865475244;
    const double inv_sqrt2pi = 0.3989422804014326779;
    std::vector<double> out(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.5 * av[i] * (1.0 + std::erf(av[i] * inv_sqrt2));
    }
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "gelu",
                          [an, inv_sqrt2, inv_sqrt2pi](Node& self) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              for (size_t i = 0; i < self.grad.size(); ++i) {
                                  double x = an->data[i];
                                  double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
                                  double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
                                  an->grad[i] += self.grad[i] * (cdf + x * pdf);
                              }
                          });
}

Tensor softmax(const Tensor& a) {
    if (a.rank() == 0 || a.numel() == 0) throw std::invalid_argument("softmax: empty tensor");
    size_t cols = a.dim(a.rank() - 1);
    size_t rows = a.numel() / cols;
    std::vector<double> out(a.numel());
    const auto& av = a.data();
    for (size_t r = 0; r < rows; ++r) {
        const double* x = av.data() + r * cols;
        double* y = out.data() + r * cols;
        double mx = x[0];
        for (size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (size_t j = 0; j < cols; ++j) y[j] /= sum;
    }
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "softmax",
                          [an, rows, cols](Node& self) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              for (size_t r = 0; r < rows; ++r) {
                                  const double* y = self.data.data() + r * cols;
                                  const double* dy = self.grad.data() + r * cols;
                                  double dot = 0.0;
                                  for (size_t j = 0; j < cols; ++j) dot += dy[j] * y[j];
                                  double* dx = an->grad.data() + r * cols;
                                  for (size_t j = 0; j < cols; ++j) {
                                      dx[j] += y[j] * (dy[j] - dot);
                                  }
                              }
                          });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    size_t cols = x.dim(x.rank() - 1);
    if (gain.numel() != static_cast<int64_t>(cols) || bias.numel() != static_cast<int64_t>(cols)) {
        throw std::invalid_argument("layer_norm: gain/bias must match last axis " +
                                    std::to_string(cols));
    }
    size_t rows = x.numel() / cols;
    std::vector<double> out(x.numel());
    std::vector<double> xhat(x.numel());
    std::vector<double> inv_std(rows);
    const auto& xv = x.data();
    const auto& gv = gain.data();
    const auto& bv = bias.data();
    for (size_t r = 0; r < rows; ++r) {
        const double* row = xv.data() + r * cols;
        double mean = 0.0;
        for (size_t j = 0; j < cols; ++j) mean += row[j];
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (size_t j = 0; j < cols; ++j) {
            double h = (row[j] - mean) * is;
            xhat[r * cols + j] = h;
            out[r * cols + j] = h * gv[j] + bv[j];
        }
    }
    Node* xn = x.node();
    Node* gn = gain.node();
    Node* bn = bias.node();
    auto xhat_s = std::make_shared<std::vector<double>>(std::move(xhat));
    auto istd_s = std::make_shared<std::vector<double>>(std::move(inv_std));
    return make_op_result(
        x.shape(), std::move(out), {x, gain, bias}, "layer_norm",
        [xn, gn, bn, xhat_s, istd_s, rows, cols](Node& self) {
            const auto& xh = *xhat_s;
            const auto& istd = *istd_s;
            if (gn->requires_grad) gn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            if (xn->requires_grad) xn->ensure_grad();
            for (size_t r = 0; r < rows; ++r) {
                const double* dy = self.grad.data() + r * cols;
                const double* h = xh.data() + r * cols;
                if (gn->requires_grad || bn->requires_grad) {
                    for (size_t j = 0; j < cols; ++j) {
                        if (gn->requires_grad) gn->grad[j] += dy[j] * h[j];
                        if (bn->requires_grad) bn->grad[j] += dy[j];
                    }
                }
                if (xn->requires_grad) {
                    // dx = (g - mean(g) - xhat * mean(g .* xhat)) * inv_std,
                    // g = dy .* gain
                    double mean_g = 0.0, mean_gh = 0.0;
                    for (size_t j = 0; j < cols; ++j) {
                        double g = dy[j] * gn->data[j];
                        mean_g += g;
                        mean_gh += g * h[j];
                    }
                    mean_g /= static_cast<double>(cols);
                    mean_gh /= static_cast<double>(cols);
                    double* dx = xn->grad.data() + r * cols;
                    for (size_t j = 0; j < cols; ++j) {
                        double g = dy[j] * gn->data[j];
                        dx[j] += (g - mean_g - h[j] * mean_gh) * istd[r];
                    }
                }
            }
        });
}

Tensor concat(const std::vector<Tensor>& parts, size_t axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const Shape& s0 = parts[0].shape();
    if (axis >= s0.size()) throw std::invalid_argument("concat: axis out of range");
    Shape out_shape = s0;
    int64_t axis_total = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != s0.size()) throw std::invalid_argument("concat: rank mismatch");
        for (size_t d = 0; d < s.size(); ++d) {
            if (d != axis && s[d] != s0[d]) {
                throw std::invalid_argument("concat: shape mismatch " + shape_str(s) + " vs " +
                                            shape_str(s0));
            }
        }
        axis_total += s[axis];
    }
    out_shape[axis] = axis_total;

    size_t outer = 1;
    for (size_t d = 0; d < axis; ++d) outer *= s0[d];
    size_t inner = 1;
    for (size_t d = axis + 1; d < s0.size(); ++d) inner *= s0[d];

    std::vector<double> out(shape_numel(out_shape));
    size_t out_row = axis_total * inner;
    size_t off = 0;
    std::vector<size_t> part_offsets;
    for (const auto& p : parts) {
        part_offsets.push_back(off);
        size_t blk = p.shape()[axis] * inner;
        const auto& pv = p.data();
        for (size_t o = 0; o < outer; ++o) {
            std::copy(pv.begin() + o * blk, pv.begin() + (o + 1) * blk,
                      out.begin() + o * out_row + off);
        }
        off += blk;
    }

    std::vector<Node*> pnodes;
    for (const auto& p : parts) pnodes.push_back(p.node());
    return make_op_result(out_shape, std::move(out), parts, "concat",
                          [pnodes, part_offsets, outer, inner, out_row, axis](Node& self) {
                              for (size_t pi = 0; pi < pnodes.size(); ++pi) {
                                  Node* pn = pnodes[pi];
                                  if (!pn->requires_grad) continue;
                                  pn->ensure_grad();
                                  size_t blk = pn->shape[axis] * inner;
                                  for (size_t o = 0; o < outer; ++o) {
                                      const double* src =
                                          self.grad.data() + o * out_row + part_offsets[pi];
                                      double* dst = pn->grad.data() + o * blk;
                                      for (size_t j = 0; j < blk; ++j) dst[j] += src[j];
                                  }
                              }
                          });
}

Tensor slice(const Tensor& a, size_t axis, int64_t start, int64_t stop) {
    const Shape& s = a.shape();
    if (axis >= s.size()) throw std::invalid_argument("slice: axis out of range");
    if (start < 0 || stop > s[axis] || start >= stop) {
        throw std::invalid_argument("slice: bad range [" + std::to_string(start) + "," +
                                    std::to_string(stop) + ") on axis of size " +
                                    std::to_string(s[axis]));
    }
    Shape out_shape = s;
    out_shape[axis] = stop - start;
    size_t outer = 1;
    for (size_t d = 0; d < axis; ++d) outer *= s[d];
    size_t inner = 1;
    for (size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
    size_t in_row = s[axis] * inner;
    size_t out_row = (stop - start) * inner;

    std::vector<double> out(shape_numel(out_shape));
    const auto& av = a.data();
    for (size_t o = 0; o < outer; ++o) {
        std::copy(av.begin() + o * in_row + start * inner,
                  av.begin() + o * in_row + stop * inner, out.begin() + o * out_row);
    }
    Node* an = a.node();
    return make_op_result(out_shape, std::move(out), {a}, "slice",
                          [an, outer, inner, in_row, out_row, start](Node& self) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              for (size_t o = 0; o < outer; ++o) {
                                  const double* src = self.grad.data() + o * out_row;
                                  double* dst = an->grad.data() + o * in_row + start * inner;
                                  for (size_t j = 0; j < out_row; ++j) dst[j] += src[j];
                              }
                          });
}

namespace {
Tensor reduce_all(const Tensor& a, bool mean, const char* name) {
    double sum = 0.0;
    for (double x : a.data()) sum += x;
    double denom = mean ? static_cast<double>(a.numel()) : 1.0;
    Node* an = a.node();
    return make_op_result({1}, {sum / denom}, {a}, name, [an, denom](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        double g = self.grad[0] / denom;
        for (double& x : an->grad) x += g;
    });
}
}  // namespace

Tensor mean_all(const Tensor& a) { return reduce_all(a, true, "mean_all"); }
Tensor sum_all(const Tensor& a) { return reduce_all(a, false, "sum_all"); }

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw std::invalid_argument("transpose: expects rank 2");
    size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    const auto& av = a.data();
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
    }
    Node* an = a.node();
    return make_op_result({static_cast<int64_t>(n), static_cast<int64_t>(m)}, std::move(out), {a},
                          "transpose", [an, m, n](Node& self) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              for (size_t i = 0; i < m; ++i) {
                                  for (size_t j = 0; j < n; ++j) {
                                      an->grad[i * n + j] += self.grad[j * m + i];
                                  }
                              }
                          });
}

Tensor dropout(const Tensor& a, double p, uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    if (p == 0.0) return a;
    rng::Rng r(seed);
    auto mask = std::make_shared<std::vector<double>>(a.numel());
    double keep_scale = 1.0 / (1.0 - p);
    for (auto& m : *mask) m = r.uniform01() >= p ? keep_scale : 0.0;
    std::vector<double> out(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * (*mask)[i];
    Node* an = a.node();
    return make_op_result(a.shape(), std::move(out), {a}, "dropout", [an, mask](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * (*mask)[i];
    });
}

void backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " +
                                    shape_str(loss.shape()));
    }
    // reverse topological order by iterative DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    struct Frame {
        Node* node;
        size_t next_child;
    };
    std::vector<Frame> stack{{loss.node(), 0}};
    visited.insert(loss.node());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_child < f.node->parents.size()) {
            Node* child = f.node->parents[f.next_child++].get();
            if (!visited.count(child)) {
                visited.insert(child);
                stack.push_back({child, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

AdamState AdamState::for_params(const std::vector<Tensor>& params, double lr_) {
    AdamState st;
    st.lr = lr_;
    for (const auto& p : params) {
        st.m.emplace_back(p.numel(), 0.0);
        st.v.emplace_back(p.numel(), 0.0);
    }
    return st;
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state does not match parameter list");
    }
    if (!(state.beta1 > 0.0 && state.beta1 < 1.0 && state.beta2 > 0.0 && state.beta2 < 1.0)) {
        throw std::invalid_argument("adam_step: betas must be in (0, 1)");
    }
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi];
        if (!p.has_grad()) {
            throw std::runtime_error("adam_step: parameter " + std::to_string(pi) +
                                     " has no gradient");
        }
        auto& m = state.m[pi];
        auto& v = state.v[pi];
        auto& w = p.data();
        const auto& g = p.grad();
        if (m.size() != w.size()) throw std::runtime_error("adam_step: moment shape mismatch");
        for (size_t i = 0; i < w.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            w[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace trajsr::tensor
