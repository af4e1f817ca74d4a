#include <doctest.h>

#include <cmath>
#include <vector>

#include "qglm/errors.hpp"
#include "qglm/rng.hpp"

using qglm::ParameterError;
using qglm::Rng;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

template <typename Draw>
Moments sample_moments(int n, Draw draw) {
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = draw();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  return {mean, sum_sq / n - mean * mean};
}

constexpr int kDraws = 200000;

}  // namespace

TEST_CASE("same seed reproduces the exact bit stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.bits() == b.bits());
  }
  Rng c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 10; ++i) {
    all_equal = all_equal && c.bits() == d.bits();
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("mixed draw sequences are reproducible") {
  const auto run = [](std::uint64_t seed) {
    Rng r(seed);
    std::vector<double> out;
    for (int i = 0; i < 50; ++i) {
      out.push_back(r.uniform());
      out.push_back(r.normal());
      out.push_back(static_cast<double>(r.poisson(3.7)));
      out.push_back(r.gamma(1.4, 2.0));
      out.push_back(r.inverse_gaussian(2.0, 5.0));
    }
    return out;
  };
  CHECK(run(7) == run(7));
}

TEST_CASE("uniform moments and range") {
  Rng r(1);
  double lo = 1.0, hi = 0.0;
  const Moments m = sample_moments(kDraws, [&] {
    const double v = r.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    return v;
  });
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(m.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(m.variance == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("uniform_pos never returns zero") {
  Rng r(2);
  for (int i = 0; i < 100000; ++i) {
    const double v = r.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("uniform_int stays in range and covers all residues") {
  Rng r(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const std::uint64_t v = r.uniform_int(7);
    REQUIRE(v < 7);
    ++counts[static_cast<int>(v)];
  }
  for (int c : counts) {
    CHECK(c > 9000);  // fair to within ~10%
  }
  CHECK_THROWS_AS(r.uniform_int(0), ParameterError);
}

TEST_CASE("normal moments") {
  Rng r(4);
  const Moments m = sample_moments(kDraws, [&] { return r.normal(); });
  CHECK(std::abs(m.mean) < 0.01);
  CHECK(m.variance == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson moments at small and chunked-large lambda") {
  for (double lambda : {0.3, 4.0, 1200.0}) {
    CAPTURE(lambda);
    Rng r(5);
    const Moments m = sample_moments(
        kDraws, [&] { return static_cast<double>(r.poisson(lambda)); });
    CHECK(m.mean == doctest::Approx(lambda).epsilon(0.02));
    CHECK(m.variance == doctest::Approx(lambda).epsilon(0.05));
  }
  Rng r(6);
  CHECK(r.poisson(0.0) == 0);
  CHECK_THROWS_AS(r.poisson(-1.0), ParameterError);
}

TEST_CASE("gamma moments above and below shape 1") {
  for (double shape : {0.4, 1.0, 3.5}) {
    for (double scale : {0.5, 2.0}) {
      CAPTURE(shape);
      CAPTURE(scale);
      Rng r(7);
      const Moments m =
          sample_moments(kDraws, [&] { return r.gamma(shape, scale); });
      CHECK(m.mean == doctest::Approx(shape * scale).epsilon(0.02));
      CHECK(m.variance ==
            doctest::Approx(shape * scale * scale).epsilon(0.06));
    }
  }
  Rng r(8);
  CHECK_THROWS_AS(r.gamma(0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(r.gamma(1.0, -2.0), ParameterError);
}

TEST_CASE("inverse gaussian moments") {
  const double mu = 2.0, lambda = 5.0;
  Rng r(9);
  const Moments m =
      sample_moments(kDraws, [&] { return r.inverse_gaussian(mu, lambda); });
  CHECK(m.mean == doctest::Approx(mu).epsilon(0.02));
  CHECK(m.variance == doctest::Approx(mu * mu * mu / lambda).epsilon(0.08));
  CHECK_THROWS_AS(r.inverse_gaussian(-1.0, 1.0), ParameterError);
}
