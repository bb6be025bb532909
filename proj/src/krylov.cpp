#include "nlwave/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

KrylovResult minres(const LinearOperator& apply, const Field& b, Field& x, double rtol,
                    int max_iter) {
  KrylovResult res;
  x = Field::Zero(b.size());
  const double beta1 = b.norm();
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }

  Field r1 = b;
  Field r2 = b;
  Field y = b;
  Field w = Field::Zero(b.size());
  Field w1 = w;
  Field w2 = w;
  double oldb = 0.0;
  double beta = beta1;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;
  const double tiny = std::numeric_limits<double>::min();

  for (int itn = 1; itn <= max_iter; ++itn) {
    const Field v = y / beta;
    y = apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = r2.norm();

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    if (gamma <= tiny) {
      res.breakdown = true;
      res.iterations = itn;
      res.residual = phibar;
      return res;
    }
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    res.iterations = itn;
    res.residual = phibar;
    if (phibar <= rtol * beta1) {
      res.converged = true;
      return res;
    }
    // Lanczos exhausted the Krylov space: the last iterate is the exact solution
    // of the projected problem.
    if (beta <= 1e-15 * beta1) {
      res.converged = phibar <= std::max(rtol, 1e-10) * beta1;
      res.breakdown = !res.converged;
      return res;
    }
  }
  return res;
}

}  // namespace nlwave
