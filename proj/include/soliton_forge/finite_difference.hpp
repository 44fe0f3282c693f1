#pragma once

#include <span>
#include <type_traits>

namespace soliton_forge::fd {

/// Central-difference weights for the first and second derivative on the
/// symmetric offsets -r..r (r = order / 2).
struct CentralStencil {
  int radius;
  std::span<const double> first;   // length 2r + 1
  std::span<const double> second;  // length 2r + 1
};

/// Supported orders: 2, 4, 6, 8.
const CentralStencil& central_stencil(int order);

/// First derivative of a sampled function. `sample(k)` returns the value at x + k h.
template <class Sample>
auto first_derivative(Sample&& sample, double h, int order) {
  using Value = std::decay_t<decltype(sample(0))>;
  const CentralStencil& st = central_stencil(order);
  Value acc = sample(-st.radius) * st.first[0];
  for (int k = -st.radius + 1; k <= st.radius; ++k) {
    const double w = st.first[k + st.radius];
    if (w != 0.0) acc = acc + sample(k) * w;
  }
  return Value(acc * (1.0 / h));
}

/// Second derivative along one axis.
template <class Sample>
auto second_derivative(Sample&& sample, double h, int order) {
  using Value = std::decay_t<decltype(sample(0))>;
  const CentralStencil& st = central_stencil(order);
  Value acc = sample(-st.radius) * st.second[0];
  for (int k = -st.radius + 1; k <= st.radius; ++k) {
    acc = acc + sample(k) * st.second[k + st.radius];
  }
  return Value(acc * (1.0 / (h * h)));
}

/// Mixed second derivative by tensor product of first-derivative stencils.
/// `sample(i, j)` returns the value at x + i h e_a + j h e_b.
template <class Sample>
auto mixed_derivative(Sample&& sample, double h, int order) {
  const CentralStencil& st = central_stencil(order);
  const int r = st.radius;
  bool first = true;
  using Value = std::decay_t<decltype(sample(0, 0))>;
  Value acc{};
  for (int i = -r; i <= r; ++i) {
    const double wi = st.first[i + r];
    if (wi == 0.0) continue;
    for (int j = -r; j <= r; ++j) {
      const double wj = st.first[j + r];
      if (wj == 0.0) continue;
      if (first) {
        acc = sample(i, j) * (wi * wj);
        first = false;
      } else {
        acc = acc + sample(i, j) * (wi * wj);
      }
    }
  }
  return Value(acc * (1.0 / (h * h)));
}

}  // namespace soliton_forge::fd
