#include "cascade/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace cascade {
namespace {

QuadratureRule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mass) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) j(i, i) = alpha[i];
  for (int i = 1; i < n; ++i) {
    j(i, i - 1) = std::sqrt(beta[i]);
    j(i - 1, i) = std::sqrt(beta[i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    r.weights.push_back(mass * v0 * v0);
  }
  return r;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::vector<double> alpha(n, 0.0), beta(n, 0.0);
  for (int k = 1; k < n; ++k) beta[k] = double(k) * k / (4.0 * k * k - 1.0);
  QuadratureRule r = golub_welsch(alpha, beta, 2.0);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = 0.5 * (b - a) * r.nodes[i] + 0.5 * (a + b);
    r.weights[i] *= 0.5 * (b - a);
  }
  return r;
}

QuadratureRule gauss_for_weight(const std::function<double(double)>& w, int n, double a, double b,
                                int panels) {
  if (n < 1) throw std::invalid_argument("gauss_for_weight: n must be >= 1");
  const QuadratureRule base = gauss_legendre(20);
  std::vector<double> x, m;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      const double xi = lo + 0.5 * width * (base.nodes[i] + 1.0);
      x.push_back(xi);
      m.push_back(0.5 * width * base.weights[i] * w(xi));
    }
  }
  // Stieltjes: p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}.
  const std::size_t big = x.size();
  std::vector<double> prev(big, 0.0), cur(big, 1.0), next(big);
  std::vector<double> alpha(n), beta(n, 0.0);
  double norm_prev = 1.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < big; ++i) mass += m[i];
  if (!(mass > 0.0)) throw std::invalid_argument("gauss_for_weight: weight has no mass");
  for (int k = 0; k < n; ++k) {
    double norm = 0.0, xnorm = 0.0;
    for (std::size_t i = 0; i < big; ++i) {
      norm += m[i] * cur[i] * cur[i];
      xnorm += m[i] * x[i] * cur[i] * cur[i];
    }
    alpha[k] = xnorm / norm;
    if (k > 0) beta[k] = norm / norm_prev;
    for (std::size_t i = 0; i < big; ++i) next[i] = (x[i] - alpha[k]) * cur[i] - beta[k] * prev[i];
    prev.swap(cur);
    cur.swap(next);
    norm_prev = norm;
  }
  return golub_welsch(alpha, beta, mass);
}

}  // namespace cascade
