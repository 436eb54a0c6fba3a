#pragma once

#include <array>
#include <vector>

#include "trajsr/tensor.hpp"

namespace trajsr::model {

using Point2 = std::array<double, 2>;

struct SoftDtwResult {
    double loss = 0.0;
    std::vector<Point2> grad_x;  // dLoss/dX, one entry per X point
};

// Smoothed-minimum DTW with squared Euclidean point cost. Forward DP
//   R(i,j) = d(x_i, y_j) + softmin_gamma(R(i-1,j), R(i,j-1), R(i-1,j-1)),
// loss = R(|X|, |Y|); gradient via the backward pass over alignment
// responsibilities. Converges to classic DTW as gamma -> 0+.
SoftDtwResult softdtw(const std::vector<Point2>& x, const std::vector<Point2>& y, double gamma);

double softdtw_value(const std::vector<Point2>& x, const std::vector<Point2>& y, double gamma);

// Tape-integrated variant: X is a [Lx,2] tensor, Y a constant target.
tensor::Tensor softdtw_loss(const tensor::Tensor& x, const std::vector<Point2>& y, double gamma);

}  // namespace trajsr::model
