// Gauss rules from three-term recurrences (Golub-Welsch).
#pragma once

#include <functional>
#include <vector>

namespace cascade {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss rule for the weight w(x) >= 0 on [a, b]. The measure is
/// discretised with a composite Gauss-Legendre rule (`panels` panels of 20
/// points) and the recurrence is built with the discretised Stieltjes
/// procedure. Weights sum to the total mass of w.
QuadratureRule gauss_for_weight(const std::function<double(double)>& w, int n, double a, double b,
                                int panels = 64);

}  // namespace cascade
