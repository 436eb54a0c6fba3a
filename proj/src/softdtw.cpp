#include "trajsr/softdtw.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trajsr::tensor {
// Defined in tensor.cpp; declared as a friend of Tensor.
Tensor make_op_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                      const char* op_name, std::function<void(detail::Node&)> backward_fn);
}  // namespace trajsr::tensor

namespace trajsr::model {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sqdist(const Point2& a, const Point2& b) {
    double dx = a[0] - b[0];
    double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

// softmin_gamma(a,b,c) = -gamma * log(sum_i exp(-v_i / gamma)), shifted by the
// plain min so the exponents stay <= 0.
double softmin3(double a, double b, double c, double gamma) {
    double m = std::min(a, std::min(b, c));
    if (!std::isfinite(m)) return m;
    double s = std::exp(-(a - m) / gamma) + std::exp(-(b - m) / gamma) + std::exp(-(c - m) / gamma);
    return m - gamma * std::log(s);
}

struct DpTables {
    int64_t lx = 0;
    int64_t ly = 0;
    std::vector<double> r;  // (lx+2) x (ly+2)
    std::vector<double> d;  // (lx+2) x (ly+2), cost matrix padded with zeros

    double& R(int64_t i, int64_t j) { return r[static_cast<size_t>(i * (ly + 2) + j)]; }
    double& D(int64_t i, int64_t j) { return d[static_cast<size_t>(i * (ly + 2) + j)]; }
};

DpTables forward_tables(const std::vector<Point2>& x, const std::vector<Point2>& y, double gamma) {
    if (x.empty() || y.empty()) throw std::invalid_argument("softdtw: empty sequence");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("softdtw: gamma must be positive");

    DpTables t;
    t.lx = static_cast<int64_t>(x.size());
    t.ly = static_cast<int64_t>(y.size());
    t.r.assign(static_cast<size_t>((t.lx + 2) * (t.ly + 2)), kInf);
    t.d.assign(static_cast<size_t>((t.lx + 2) * (t.ly + 2)), 0.0);

    for (int64_t i = 1; i <= t.lx; ++i)
        for (int64_t j = 1; j <= t.ly; ++j) t.D(i, j) = sqdist(x[static_cast<size_t>(i - 1)], y[static_cast<size_t>(j - 1)]);

    t.R(0, 0) = 0.0;
    for (int64_t i = 1; i <= t.lx; ++i) {
        for (int64_t j = 1; j <= t.ly; ++j) {
            t.R(i, j) = t.D(i, j) + softmin3(t.R(i - 1, j), t.R(i, j - 1), t.R(i - 1, j - 1), gamma);
        }
    }
    double loss = t.R(t.lx, t.ly);
    if (!std::isfinite(loss)) throw std::runtime_error("softdtw: non-finite loss");
    return t;
}

// Alignment responsibilities E(i,j) = dLoss/dR(i,j), swept bottom-right to
// top-left over the padded tables.
std::vector<double> backward_e(DpTables& t, double gamma) {
    int64_t lx = t.lx;
    int64_t ly = t.ly;
    std::vector<double> e(static_cast<size_t>((lx + 2) * (ly + 2)), 0.0);
    auto E = [&](int64_t i, int64_t j) -> double& { return e[static_cast<size_t>(i * (ly + 2) + j)]; };

    for (int64_t i = 1; i <= lx; ++i) t.R(i, ly + 1) = -kInf;
    for (int64_t j = 1; j <= ly; ++j) t.R(lx + 1, j) = -kInf;
    t.R(lx + 1, ly + 1) = t.R(lx, ly);
    E(lx + 1, ly + 1) = 1.0;

    for (int64_t i = lx; i >= 1; --i) {
        for (int64_t j = ly; j >= 1; --j) {
            // Each exponent is <= 0 because R(i+1,j) - D(i+1,j) is a softmin
            // over a set containing R(i,j); exp never overflows.
            double a = std::exp((t.R(i + 1, j) - t.R(i, j) - t.D(i + 1, j)) / gamma);
            double b = std::exp((t.R(i, j + 1) - t.R(i, j) - t.D(i, j + 1)) / gamma);
            double c = std::exp((t.R(i + 1, j + 1) - t.R(i, j) - t.D(i + 1, j + 1)) / gamma);
            E(i, j) = a * E(i + 1, j) + b * E(i, j + 1) + c * E(i + 1, j + 1);
        }
    }
    return e;
}

}  // namespace

SoftDtwResult softdtw(const std::vector<Point2>& x, const std::vector<Point2>& y, double gamma) {
    DpTables t = forward_tables(x, y, gamma);
    SoftDtwResult out;
    out.loss = t.R(t.lx, t.ly);

    std::vector<double> e = backward_e(t, gamma);
    auto E = [&](int64_t i, int64_t j) { return e[static_cast<size_t>(i * (t.ly + 2) + j)]; };

    out.grad_x.assign(x.size(), Point2{0.0, 0.0});
    for (int64_t i = 1; i <= t.lx; ++i) {
        for (int64_t j = 1; j <= t.ly; ++j) {
            double w = E(i, j);
            if (w == 0.0) continue;
            const Point2& xi = x[static_cast<size_t>(i - 1)];
            const Point2& yj = y[static_cast<size_t>(j - 1)];
            out.grad_x[static_cast<size_t>(i - 1)][0] += w * 2.0 * (xi[0] - yj[0]);
            out.grad_x[static_cast<size_t>(i - 1)][1] += w * 2.0 * (xi[1] - yj[1]);
        }
    }
    for (const Point2& g : out.grad_x) {
        if (!std::isfinite(g[0]) || !std::isfinite(g[1])) throw std::runtime_error("softdtw: non-finite gradient");
    }
    return out;
}

double softdtw_value(const std::vector<Point2>& x, const std::vector<Point2>& y, double gamma) {
    DpTables t = forward_tables(x, y, gamma);
    return t.R(t.lx, t.ly);
}

tensor::Tensor softdtw_loss(const tensor::Tensor& x, const std::vector<Point2>& y, double gamma) {
    const tensor::Shape& shape = x.shape();
    if (shape.size() != 2 || shape[1] != 2) throw std::invalid_argument("softdtw_loss: x must have shape [L,2]");
    int64_t lx = shape[0];
    std::vector<Point2> xs(static_cast<size_t>(lx));
    for (int64_t i = 0; i < lx; ++i) {
        xs[static_cast<size_t>(i)] = {x.at({i, 0}), x.at({i, 1})};
    }
    SoftDtwResult res = softdtw(xs, y, gamma);

    tensor::detail::Node* xn = x.node();
    return tensor::make_op_result(
        {1}, {res.loss}, {x}, "softdtw",
        [xn, grad = std::move(res.grad_x)](tensor::detail::Node& self) {
            if (!xn->requires_grad) return;
            xn->ensure_grad();
            double g0 = self.grad[0];
            for (size_t i = 0; i < grad.size(); ++i) {
                xn->grad[2 * i + 0] += g0 * grad[i][0];
                xn->grad[2 * i + 1] += g0 * grad[i][1];
            }
        });
}

}  // namespace trajsr::model
