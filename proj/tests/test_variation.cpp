#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/variation.hpp"

using namespace bss;

TEST_CASE("second differences at two frequencies") {
  const SamplePath x{0.1, {0, 1, 4, 9, 16, 25}};
  CHECK(second_diff(x, 1) == std::vector<double>{2, 2, 2, 2});
  CHECK(second_diff(x, 2) == std::vector<double>{8, 8});
  CHECK_THROWS_AS(second_diff(x, 3), LengthError);
  CHECK_THROWS_AS(second_diff(x, 0), DomainError);
}

TEST_CASE("power variations over prefixes") {
  const SamplePath x{0.25, {0, 1, 0, 2, 0}};
  // Second differences at lag 1: -2, 3, -4.
  const PowerVariation v = power_variation(x, 1, 2.0);
  CHECK(v.value == doctest::Approx(4 + 9 + 16));
  CHECK(v.count == 3);
  CHECK(power_variation(x, 1, 1.0).value == doctest::Approx(9));
  CHECK(power_variation(x, 1, 2.0, 0.75).value == doctest::Approx(13));
  CHECK(power_variation(x, 2, 2.0).value == doctest::Approx(0));
  CHECK_THROWS_AS(power_variation(x, 1, 2.0, 0.25), LengthError);
  CHECK_THROWS_AS(power_variation(x, 1, 2.0, 2.0), DomainError);
  CHECK_THROWS_AS(power_variation(x, 1, -1.0), DomainError);

  const PowerVariation f = first_order_variation(x, 2.0);
  CHECK(f.value == doctest::Approx(1 + 1 + 4 + 4));
  CHECK(f.count == 4);
  CHECK(first_order_variation(x, 3.0, 0.5).value == doctest::Approx(2));
}

TEST_CASE("grid index tolerates representation error") {
  CHECK(grid_index(0.3, 0.1) == 3);
  CHECK(grid_index(1.0, 1.0 / 3.0) == 3);
  CHECK(grid_index(0.35, 0.1) == 3);
}

TEST_CASE("relative realized variation") {
  const SamplePath x{0.25, {0, 1, 2, 3, 4}};
  const RrvPath r = rrv(x, 2.0);
  CHECK(r.values == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(r.times[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(rrv(SamplePath{0.1, {1, 1, 1}}, 2.0), DegenerateError);

  std::ostringstream os;
  write_rrv_csv(os, r);
  CHECK(os.str() == "t,rrv\n0.25,0.25\n0.5,0.5\n0.75,0.75\n1,1\n");
}
