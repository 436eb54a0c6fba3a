#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace trajsr::tensor {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily, same length as data
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;  // reads own grad, accumulates into parents

    void ensure_grad();
    void accumulate(size_t i, double v) { grad[i] += v; }
};

}  // namespace detail

// Dense row-major f64 tensor with reverse-mode gradients. A handle: copies
// share the underlying buffer. The graph is rebuilt by every forward pass;
// a tensor and its graph belong to one thread.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return n_->shape; }
    int64_t numel() const { return static_cast<int64_t>(n_->data.size()); }
    int64_t dim(size_t axis) const { return n_->shape[axis]; }
    size_t rank() const { return n_->shape.size(); }

    std::vector<double>& data() { return n_->data; }
    const std::vector<double>& data() const { return n_->data; }
    double at(std::initializer_list<int64_t> idx) const;

    bool requires_grad() const { return n_->requires_grad; }
    bool has_grad() const { return !n_->grad.empty(); }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void zero_grad();

    detail::Node* node() const { return n_.get(); }
    std::shared_ptr<detail::Node> shared_node() const { return n_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> n) : n_(std::move(n)) {}
    std::shared_ptr<detail::Node> n_;

    friend Tensor make_op_result(Shape shape, std::vector<double> data,
                                 std::vector<Tensor> parents, const char* op_name,
                                 std::function<void(detail::Node&)> backward_fn);
};

// --- forward primitives -------------------------------------------------
// Broadcasting: `add` and `mul` accept equal shapes, or a second operand
// whose shape is a trailing suffix of the first (broadcast over leading
// dims). Nothing fancier, so every backward rule stays small.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,n] -> [m,n]
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);                     // exact erf form
Tensor softmax(const Tensor& a);                  // last axis, max-subtracted
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-8);
Tensor concat(const std::vector<Tensor>& parts, size_t axis);
Tensor slice(const Tensor& a, size_t axis, int64_t start, int64_t stop);
Tensor mean_all(const Tensor& a);                 // -> scalar [1]
Tensor sum_all(const Tensor& a);                  // -> scalar [1]
Tensor transpose(const Tensor& a);                // 2-D
// Inverted dropout with an externally seeded mask; p = 0 returns the input.
Tensor dropout(const Tensor& a, double p, uint64_t seed);

// Populates grad on every reachable requires_grad tensor, accumulating
// across fan-out. Repeated calls without zero_grad keep accumulating.
void backward(const Tensor& loss);

// --- optimizer ------------------------------------------------------------

struct AdamState {
    int64_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<std::vector<double>> m;  // aligned with the parameter list
    std::vector<std::vector<double>> v;

    static AdamState for_params(const std::vector<Tensor>& params, double lr);
};

// Standard bias-corrected Adam over the fixed parameter list.
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace trajsr::tensor
