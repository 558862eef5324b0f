#ifndef EWGSL_ENTMAX_H_
#define EWGSL_ENTMAX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace ewgsl {

// alpha-entmax maps a score vector e onto the probability simplex:
//
//   p_j = [(alpha - 1) e_j - tau]_+ ^ (1 / (alpha - 1)),   sum_j p_j = 1.
//
// alpha = 1 is softmax, alpha = 2 is sparsemax. For alpha > 1 entries whose
// scaled score falls at or below tau are exactly zero.

inline constexpr double kEntmaxDefaultTol = 1e-10;
inline constexpr int kEntmaxDefaultMaxIter = 100;

struct EntmaxResult {
  std::vector<double> p;
  // Threshold in the scaled domain z = (alpha - 1) e. For alpha = 1 this is
  // log-sum-exp(e), i.e. p = exp(e - tau).
  double tau = 0.0;
  std::vector<std::size_t> support;
  double alpha = 1.5;
};

// Bisection solver for tau on [max(z) - 1, max(z)]. Stops once
// |sum(p) - 1| <= tol or after max_iter halvings, then rescales p to sum to
// exactly one. alpha must lie in [1, 2].
EntmaxResult Entmax(std::span<const double> e, double alpha,
                    double tol = kEntmaxDefaultTol,
                    int max_iter = kEntmaxDefaultMaxIter);

// Exact solver via descending sort and the closed-form threshold for each
// candidate support size. Only alpha in {1.5, 2} is supported.
EntmaxResult EntmaxSortedExact(std::span<const double> e, double alpha);

// J^T * upstream, with J = diag(s) - s s^T / sum(s) and s_j = p_j^(2 - alpha)
// on the support (0 elsewhere).
std::vector<double> EntmaxVjp(const EntmaxResult& result,
                              std::span<const double> upstream);

// sum_j [(alpha - 1) e_j - tau]_+ ^ (1 / (alpha - 1)); the quantity the
// threshold drives to one.
double EntmaxMass(std::span<const double> e, double alpha, double tau);

// Allocation-free row kernels used by the attention layers. `out` must have
// the same length as the input. Returns tau.
double EntmaxRow(std::span<const double> e, double alpha, std::span<double> out,
                 double tol = kEntmaxDefaultTol,
                 int max_iter = kEntmaxDefaultMaxIter);
void EntmaxVjpRow(std::span<const double> p, double alpha,
                  std::span<const double> upstream, std::span<double> out);

std::vector<double> Softmax(std::span<const double> x);

}  // namespace ewgsl

#endif  // EWGSL_ENTMAX_H_
