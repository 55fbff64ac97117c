#ifndef BORNRATE_QUADRATURE_H_
#define BORNRATE_QUADRATURE_H_

#include <cmath>

namespace bornrate {

namespace internal {

template <typename F>
double SimpsonStep(const F& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return SimpsonStep(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         SimpsonStep(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace internal

// Adaptive Simpson with Richardson correction. `abs_tol` bounds the
// estimated absolute error over [a, b].
template <typename F>
double AdaptiveSimpson(const F& f, double a, double b, double abs_tol,
                       int max_depth = 48) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return internal::SimpsonStep(f, a, fa, b, fb, m, fm, whole, abs_tol,
                               max_depth);
}

}  // namespace bornrate

#endif  // BORNRATE_QUADRATURE_H_
