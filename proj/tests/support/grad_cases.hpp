#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "gradcheck.hpp"

namespace strotss::testing {

enum class GradCaseKind { Primitive, Loss };

// One randomized gradient check. Each call draws a fresh instance from the
// generator and returns the finite-difference comparison.
struct GradCase {
  std::string name;
  GradCaseKind kind;
  std::function<GradCheck(Rng&)> instance;
};

inline constexpr double kGradTolerance = 1e-3;
inline constexpr std::size_t kGradInstances = 20;

// Keeps gtest from dumping the struct bytes into test names.
inline void PrintTo(const GradCase& c, std::ostream* os) { *os << c.name; }

// Every primitive of the autograd engine and every loss term.
std::vector<GradCase> gradient_cases();

}  // namespace strotss::testing
