#include "doctest.h"

#include <cmath>
#include <random>

#include "supercm/rng.hpp"

using namespace supercm;

TEST_CASE("same seed gives the same sequence") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("engine is the standard-specified mt19937_64 over a mixed seed") {
  // Ties the sequence to the C++ standard's fixed mt19937_64 definition, so
  // streams are bit-identical across platforms and compilers.
  Rng a(7);
  std::mt19937_64 reference(detail::mix64(7));
  for (int i = 0; i < 20; ++i) {
    CHECK(a.next_u64() == reference());
  }
}

TEST_CASE("uniform stays in [0, 1)") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const real u = rng.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
  }
}

TEST_CASE("split streams are independent of the parent's position") {
  Rng parent(99);
  const Rng child_before = parent.split(3);
  parent.next_u64();
  parent.next_u64();
  Rng child_after = parent.split(3);
  Rng child_copy = child_before;
  // splitting does not depend on how far the parent has advanced
  for (int i = 0; i < 20; ++i) {
    CHECK(child_copy.next_u64() == child_after.next_u64());
  }
}

TEST_CASE("distinct stream ids give distinct streams") {
  Rng parent(99);
  Rng a = parent.split(0);
  Rng b = parent.split(1);
  bool any_diff = false;
  for (int i = 0; i < 10; ++i) {
    if (a.next_u64() != b.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("normal moments") {
  Rng rng(17);
  real sum = 0;
  real sum_sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const real x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const real mean = sum / n;
  const real var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("index covers the range") {
  Rng rng(31);
  bool seen[5] = {false, false, false, false, false};
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = rng.index(5);
    CHECK(k < 5);
    seen[k] = true;
  }
  for (bool s : seen) CHECK(s);
}
