#include "soliton_forge/finite_difference.hpp"

#include <array>

#include "soliton_forge/errors.hpp"

namespace soliton_forge::fd {
namespace {

constexpr std::array<double, 3> kFirst2{-0.5, 0.0, 0.5};
constexpr std::array<double, 3> kSecond2{1.0, -2.0, 1.0};

constexpr std::array<double, 5> kFirst4{1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
constexpr std::array<double, 5> kSecond4{-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};

constexpr std::array<double, 7> kFirst6{-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0,
                                        3.0 / 4,    -3.0 / 20, 1.0 / 60};
constexpr std::array<double, 7> kSecond6{1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18,
                                         3.0 / 2,  -3.0 / 20, 1.0 / 90};

constexpr std::array<double, 9> kFirst8{1.0 / 280, -4.0 / 105, 1.0 / 5,    -4.0 / 5, 0.0,
                                        4.0 / 5,   -1.0 / 5,    4.0 / 105, -1.0 / 280};
constexpr std::array<double, 9> kSecond8{-1.0 / 560, 8.0 / 315, -1.0 / 5,  8.0 / 5,   -205.0 / 72,
                                         8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};

const CentralStencil kStencil2{1, kFirst2, kSecond2};
const CentralStencil kStencil4{2, kFirst4, kSecond4};
const CentralStencil kStencil6{3, kFirst6, kSecond6};
const CentralStencil kStencil8{4, kFirst8, kSecond8};

}  // namespace

const CentralStencil& central_stencil(int order) {
  switch (order) {
    case 2: return kStencil2;
    case 4: return kStencil4;
    case 6: return kStencil6;
    case 8: return kStencil8;
    default: throw InvalidInput("central_stencil: order must be 2, 4, 6 or 8");
  }
}

}  // namespace soliton_forge::fd
