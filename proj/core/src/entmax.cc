#include "ewgsl/entmax.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ewgsl {
namespace {

void CheckInput(std::span<const double> e, double alpha) {
  if (e.empty()) throw std::invalid_argument("entmax: empty input");
  if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("entmax: alpha must lie in [1, 2], got " +
                                std::to_string(alpha));
  }
  for (double v : e) {
    if (!std::isfinite(v)) throw std::invalid_argument("entmax: non-finite input");
  }
}

// x^(1/(alpha-1)) for x >= 0 with the common exponents special-cased.
inline double PowInv(double x, double exponent) {
  if (exponent == 1.0) return x;
  if (exponent == 2.0) return x * x;
  return std::pow(x, exponent);
}

double SoftmaxRow(std::span<const double> e, std::span<double> out) {
  const double m = *std::max_element(e.begin(), e.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    out[j] = std::exp(e[j] - m);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return m + std::log(sum);
}

EntmaxResult MakeResult(std::vector<double> p, double tau, double alpha) {
  EntmaxResult r;
  r.p = std::move(p);
  r.tau = tau;
  r.alpha = alpha;
  for (std::size_t j = 0; j < r.p.size(); ++j) {
    if (r.p[j] > 0.0) r.support.push_back(j);
  }
  return r;
}

}  // namespace

std::vector<double> Softmax(std::span<const double> x) {
  if (x.empty()) return {};
  std::vector<double> out(x.size());
  SoftmaxRow(x, out);
  return out;
}

double EntmaxMass(std::span<const double> e, double alpha, double tau) {
  const double am1 = alpha - 1.0;
  const double exponent = 1.0 / am1;
  double sum = 0.0;
  for (double v : e) {
    const double d = am1 * v - tau;
    if (d > 0.0) sum += PowInv(d, exponent);
  }
  return sum;
}

double EntmaxRow(std::span<const double> e, double alpha, std::span<double> out,
                 double tol, int max_iter) {
  if (e.size() == 1) {
    out[0] = 1.0;
    return alpha == 1.0 ? e[0] : (alpha - 1.0) * e[0] - 1.0;
  }
  if (alpha == 1.0) return SoftmaxRow(e, out);

  const double am1 = alpha - 1.0;
  const double exponent = 1.0 / am1;
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : e) zmax = std::max(zmax, am1 * v);

  double lo = zmax - 1.0;
  double hi = zmax;
  double tau = lo;
  for (int it = 0; it < max_iter; ++it) {
    tau = 0.5 * (lo + hi);
    const double f = EntmaxMass(e, alpha, tau) - 1.0;
    if (std::abs(f) <= tol) break;
    if (f > 0.0) {
      lo = tau;
    } else {
      hi = tau;
    }
  }

  double sum = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double d = am1 * e[j] - tau;
    out[j] = d > 0.0 ? PowInv(d, exponent) : 0.0;
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return tau;
}

EntmaxResult Entmax(std::span<const double> e, double alpha, double tol,
                    int max_iter) {
  CheckInput(e, alpha);
  if (!(tol > 0.0)) throw std::invalid_argument("entmax: tol must be positive");
  std::vector<double> p(e.size());
  const double tau = EntmaxRow(e, alpha, p, tol, max_iter);
  return MakeResult(std::move(p), tau, alpha);
}

EntmaxResult EntmaxSortedExact(std::span<const double> e, double alpha) {
  CheckInput(e, alpha);
  if (alpha != 1.5 && alpha != 2.0) {
    throw std::invalid_argument("sorted entmax solver supports alpha in {1.5, 2} only");
  }
  const double am1 = alpha - 1.0;
  std::vector<double> z(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) z[j] = am1 * e[j];
  std::vector<double> zs = z;
  std::sort(zs.begin(), zs.end(), std::greater<>());

  double tau = 0.0;
  double cumsum = 0.0;
  double cumsq = 0.0;
  for (std::size_t k = 1; k <= zs.size(); ++k) {
    cumsum += zs[k - 1];
    cumsq += zs[k - 1] * zs[k - 1];
    const double kd = static_cast<double>(k);
    double tau_k;
    if (alpha == 2.0) {
      tau_k = (cumsum - 1.0) / kd;
    } else {
      // Solve sum_{i<=k} (z_i - tau)^2 = 1 for the smaller root.
      const double mean = cumsum / kd;
      const double ss = kd * (cumsq / kd - mean * mean);
      const double delta = std::max(0.0, (1.0 - ss) / kd);
      tau_k = mean - std::sqrt(delta);
    }
    if (tau_k <= zs[k - 1]) {
      tau = tau_k;
    } else {
      break;
    }
  }

  std::vector<double> p(e.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double d = z[j] - tau;
    p[j] = d > 0.0 ? (alpha == 2.0 ? d : d * d) : 0.0;
  }
  return MakeResult(std::move(p), tau, alpha);
}

void EntmaxVjpRow(std::span<const double> p, double alpha,
                  std::span<const double> upstream, std::span<double> out) {
  double s_sum = 0.0;
  double sg = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double s = 0.0;
    if (p[j] > 0.0) {
      s = alpha == 2.0 ? 1.0 : (alpha == 1.5 ? std::sqrt(p[j]) : std::pow(p[j], 2.0 - alpha));
    }
    out[j] = s;
    s_sum += s;
    sg += s * upstream[j];
  }
  const double q = s_sum > 0.0 ? sg / s_sum : 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) out[j] *= upstream[j] - q;
}

std::vector<double> EntmaxVjp(const EntmaxResult& result,
                              std::span<const double> upstream) {
  if (upstream.size() != result.p.size()) {
    throw std::invalid_argument("entmax vjp: upstream length mismatch");
  }
  std::vector<double> out(result.p.size());
  EntmaxVjpRow(result.p, result.alpha, upstream, out);
  return out;
}

}  // namespace ewgsl
