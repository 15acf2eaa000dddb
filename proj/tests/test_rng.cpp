#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfhb/rng.hpp"

using namespace mfhb;

TEST_CASE("streams are pure functions of their keys") {
  RngStream a(42, 1, 7, 3);
  RngStream b(42, 1, 7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 1, 7, 4);
  RngStream d(42, 1, 8, 3);
  RngStream e(43, 1, 7, 3);
  RngStream f(42, 1, 7, 3);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    const auto ref = f.next_u64();
    all_equal &= c.next_u64() == ref;
    all_equal &= d.next_u64() == ref;
    all_equal &= e.next_u64() == ref;
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniforms live strictly inside (0,1)") {
  RngStream s(7, 0);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.next_uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u;
  }
  mean /= n;
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normals have the right first moments") {
  RngStream s(123, 9);
  const int n = 200000;
  double mean = 0.0, var = 0.0, kurt = 0.0;
  std::vector<double> xs(n);
  for (auto& x : xs) x = s.next_normal();
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) {
    const double c = x - mean;
    var += c * c;
    kurt += c * c * c * c;
  }
  var /= n;
  kurt = kurt / n / (var * var);
  CHECK(mean == doctest::Approx(0.0).epsilon(0.02));
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(kurt == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("fill_normal matches sequential draws") {
  RngStream a(5, 2, 11);
  RngStream b(5, 2, 11);
  std::vector<double> buf(7);
  a.fill_normal(buf, 2.0);
  for (double v : buf) CHECK(v == 2.0 * b.next_normal());
}
