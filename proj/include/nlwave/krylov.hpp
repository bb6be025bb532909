#pragma once

#include "nlwave/spectral.hpp"

#include <functional>

namespace nlwave {

using LinearOperator = std::function<Field(const Field&)>;

struct KrylovResult {
  bool converged = false;
  bool breakdown = false;
  int iterations = 0;
  double residual = 0.0;  ///< estimated |b - A x|
};

/// MINRES (Paige-Saunders) for a symmetric, possibly indefinite operator.
/// Starts from x = 0 and stops when |b - A x| <= rtol |b|.
KrylovResult minres(const LinearOperator& apply, const Field& b, Field& x, double rtol = 1e-13,
                    int max_iter = 500);

}  // namespace nlwave
