#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Finite-difference checks over every trainable layer, built against the
// 64-bit library. Kept free of tala types so 32-bit code can call it.
namespace tala_test {

struct GradCase {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
};

std::vector<GradCase> run_grad_cases();

}  // namespace tala_test
