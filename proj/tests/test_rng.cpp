#include <doctest.h>

#include "pnn/rng.hpp"

using namespace pnn;

TEST_CASE("identical seed gives identical sample stream") {
  Rng a(12345);
  Rng b(12345);
  const Vector va = sample_standard_normal(a, 3);
  const Vector vb = sample_standard_normal(b, 3);
  CHECK(va == vb);
}

TEST_CASE("large-sample moments of standard normal draws") {
  Rng rng(2024);
  const std::size_t n = 100000;
  const Vector v = sample_standard_normal(rng, n);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);
}

TEST_CASE("split substreams are distinct and reproducible") {
  Rng parent(7);
  Rng s0 = parent.split(0);
  Rng s1 = parent.split(1);
  CHECK(sample_standard_normal(s0, 1) != sample_standard_normal(s1, 1));

  Rng again = Rng(7).split(0);
  Rng s0b = Rng(7).split(0);
  CHECK(again.next_u64() == s0b.next_u64());

  // splitting does not consume parent state
  Rng p1(7);
  Rng p2(7);
  (void)p1.split(3);
  CHECK(p1.next_u64() == p2.next_u64());
}

TEST_CASE("sample_standard_normal rejects n = 0") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_standard_normal(rng, 0), DomainError);
}

TEST_CASE("uniform stays inside its interval") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 2.0);
    CHECK(u >= -3.0);
    CHECK(u < 2.0);
  }
}
