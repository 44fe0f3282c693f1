#pragma once

#include <vector>

namespace soliton_forge {

/// Value with first and second derivative.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Piecewise interpolation by the polynomial through the `order + 1` nodes around the
/// evaluation point (derivatives from Fornberg weights). Not globally smooth, but value
/// and derivatives converge at high order on non-uniform nodes.
class LocalPolynomial {
 public:
  LocalPolynomial(std::vector<double> x, std::vector<double> y, int order = 7);
  Jet operator()(double x) const;
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

 private:
  std::vector<double> x_, y_;
  int order_;
};

/// Index i with x[i] <= v < x[i+1] (clamped to the last cell); x strictly increasing.
std::size_t locate_cell(const std::vector<double>& x, double v);

}  // namespace soliton_forge
