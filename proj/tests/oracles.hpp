// Independent numerical oracles used by the test suites. Everything here is
// deliberately written against the math, not against the library code paths
// it checks.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Central finite differences of a scalar function over every parameter
// reachable through the accessor list. Returns the worst relative error
// against the provided analytic gradient, with a floor on the denominator
// so the FD roundoff noise (~eps*|f|/h) does not dominate tiny gradients.
struct FdReport {
  double max_rel_err = 0.0;
  int n_params = 0;
};

inline FdReport fd_check(std::function<double()> loss,
                         const std::vector<double*>& params,
                         const std::vector<double>& analytic, double h = 1e-6,
                         double denom_floor = 1e-5) {
  FdReport rep;
  rep.n_params = static_cast<int>(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& p = *params[i];
    const double saved = p;
    p = saved + h;
    const double fp = loss();
    p = saved - h;
    const double fm = loss();
    p = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max(std::abs(fd) + std::abs(analytic[i]), denom_floor);
    const double rel = std::abs(fd - analytic[i]) / denom;
    if (rel > rep.max_rel_err) rep.max_rel_err = rel;
  }
  return rep;
}

// Tanh-sinh (double exponential) quadrature on (0, 1). Handles integrable
// endpoint singularities such as beta densities with shape parameters < 1.
inline double tanh_sinh_01(const std::function<double(double)>& f,
                           int levels = 9) {
  const double kPiHalf = 1.5707963267948966;
  double h = 1.0;
  // Node at t=0 maps to x=1/2, weight pi/2 * h * cosh(0)/cosh^2(...)
  auto eval = [&](double t) -> double {
    const double s = kPiHalf * std::sinh(t);
    const double x = 0.5 * (1.0 + std::tanh(s));
    const double c = std::cosh(s);
    const double w = kPiHalf * std::cosh(t) / (2.0 * c * c);
    if (x <= 0.0 || x >= 1.0 || w == 0.0 || !std::isfinite(w)) return 0.0;
    const double v = f(x);
    if (!std::isfinite(v)) return 0.0;
    return w * v;
  };
  double sum = eval(0.0);
  for (int k = 1;; ++k) {
    const double contrib = eval(k) + eval(-k);
    sum += contrib;
    if (k > 4 && std::abs(contrib) < 1e-18) break;
  }
  double integral = sum * h;
  for (int level = 1; level <= levels; ++level) {
    h *= 0.5;
    // Refinement adds the odd multiples of the new spacing.
    for (int k = 1;; k += 2) {
      const double t = k * h;
      const double contrib = eval(t) + eval(-t);
      sum += contrib;
      if (t > 4.0 && std::abs(contrib) < 1e-18) break;
    }
    integral = sum * h;
  }
  return integral;
}

// Double-exponential quadrature over (x0, inf): x = x0 + exp((pi/2) sinh t).
// Handles integrands with structure near x0 and exponential tails, including
// very slow decay rates (the node spacing grows double-exponentially).
inline double exp_sinh(const std::function<double(double)>& f, double x0,
                       int levels = 9) {
  const double kPiHalf = 1.5707963267948966;
  double h = 1.0;
  auto eval = [&](double t) -> double {
    const double e = kPiHalf * std::sinh(t);
    if (e > 700.0) return 0.0;  // x off the representable axis; f must decay
    const double dx = std::exp(e);
    const double w = kPiHalf * std::cosh(t) * dx;
    const double v = f(x0 + dx);
    if (!std::isfinite(v) || !std::isfinite(w)) return 0.0;
    return w * v;
  };
  double sum = eval(0.0);
  for (int k = 1;; ++k) {
    const double contrib = eval(k) + eval(-k);
    sum += contrib;
    if (k > 5 && std::abs(contrib) < 1e-18) break;
  }
  double integral = sum * h;
  for (int level = 1; level <= levels; ++level) {
    h *= 0.5;
    for (int k = 1;; k += 2) {
      const double t = k * h;
      const double contrib = eval(t) + eval(-t);
      sum += contrib;
      if (t > 5.0 && std::abs(contrib) < 1e-18) break;
    }
    integral = sum * h;
  }
  return integral;
}

// Beta-function value by quadrature, independent of lgamma. Splitting at
// u = 1/2 and substituting u = exp(-y) maps each half onto (ln 2, inf) where
// the mass near u = 0 (unrepresentable in doubles for shape < ~0.05) becomes
// an ordinary exponential tail in y:
//   B(a,b) = J(a,b) + J(b,a),  J(a,b) = int_{ln2}^inf e^{-a y} (1-e^{-y})^{b-1} dy.
inline double beta_fn_quad(double a, double b) {
  auto J = [](double p, double q) {
    return exp_sinh(
        [p, q](double y) {
          return std::exp(-p * y) * std::pow(-std::expm1(-y), q - 1.0);
        },
        std::log(2.0));
  };
  return J(a, b) + J(b, a);
}

// Energy of a rigid planar pendulum: angle from +x axis, gravity along -y.
inline double pendulum_energy(double q, double qd, double inertia_about_pivot,
                              double mass, double com_offset, double gravity) {
  return 0.5 * inertia_about_pivot * qd * qd +
         mass * gravity * com_offset * std::sin(q);
}

// Population mean/std.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mu = 0;
  for (double x : xs) mu += x;
  mu /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mu) * (x - mu);
  var /= static_cast<double>(xs.size());
  return {mu, std::sqrt(var)};
}

}  // namespace oracles
