#include "soliton_forge/interpolation.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "soliton_forge/errors.hpp"

namespace soliton_forge {

std::size_t locate_cell(const std::vector<double>& x, double v) {
  auto it = std::upper_bound(x.begin(), x.end(), v);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

LocalPolynomial::LocalPolynomial(std::vector<double> x, std::vector<double> y, int order)
    : x_(std::move(x)), y_(std::move(y)), order_(order) {
  const std::size_t n = x_.size();
  if (order_ < 2 || n < static_cast<std::size_t>(order_) + 1 || y_.size() != n) {
    throw InvalidInput("local polynomial needs order >= 2 and order + 1 matching nodes");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw InvalidInput("local polynomial nodes must be strictly increasing");
  }
}

Jet LocalPolynomial::operator()(double v) const {
  if (v < x_.front() || v > x_.back()) {
    throw DomainError("local polynomial evaluated outside [" + std::to_string(x_.front()) + ", " +
                      std::to_string(x_.back()) + "]");
  }
  // Window of order + 1 nodes centred on the cell containing v.
  const std::size_t n = x_.size(), m = static_cast<std::size_t>(order_) + 1;
  const std::size_t cell = locate_cell(x_, v);
  const std::size_t first = std::min(cell > (m - 2) / 2 ? cell - (m - 2) / 2 : 0, n - m);

  // Fornberg's recursion for the weights of derivatives 0..2 at v.
  constexpr int kDerivs = 2;
  std::vector<std::array<double, kDerivs + 1>> c(m, {0.0, 0.0, 0.0});
  double c1 = 1.0, c4 = x_[first] - v;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < m; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), kDerivs);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x_[first + i] - v;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x_[first + i] - x_[first + j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  Jet out;
  for (std::size_t i = 0; i < m; ++i) {
    out.value += c[i][0] * y_[first + i];
    out.d1 += c[i][1] * y_[first + i];
    out.d2 += c[i][2] * y_[first + i];
  }
  return out;
}

}  // namespace soliton_forge
