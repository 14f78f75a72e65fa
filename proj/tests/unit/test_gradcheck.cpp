#include <gtest/gtest.h>

#include "grad_cases.hpp"

TEST(GradCheck, EveryLayerMatchesFiniteDifferences) {
  const auto cases = tala_test::run_grad_cases();
  ASSERT_EQ(cases.size(), 8u);
  for (const auto& c : cases) {
    EXPECT_GT(c.checked, 0u) << c.name;
    EXPECT_LE(c.max_rel_error, 1e-4) << c.name << " worst at " << c.worst_param;
  }
}
