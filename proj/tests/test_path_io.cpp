#include <doctest.h>

#include <sstream>

#include "bss/errors.hpp"
#include "bss/path_io.hpp"
#include "bss/simulate.hpp"

using namespace bss;

TEST_CASE("path CSV round trip is exact") {
  const SamplePath x = simulate_exact_gaussian(GammaKernelParams(-0.2, 1.0), 1.0,
                                               SimGrid{300, 1.0}, {1, 2});
  std::stringstream ss;
  write_path_csv(ss, x);
  const SamplePath y = read_path_csv(ss);
  CHECK(y.values == x.values);
  CHECK(y.step == doctest::Approx(x.step).epsilon(1e-14));
}

TEST_CASE("path CSV validation") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_path_csv(in);
  };
  const SamplePath ok = parse("t,x\n0,1\n0.5,2\n1,4\n");
  CHECK(ok.step == doctest::Approx(0.5));
  CHECK(ok.values == std::vector<double>{1, 2, 4});
  CHECK_THROWS_AS(parse("time,x\n0,1\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse("t,x\n0,1\n0.5,2\n1.2,4\n"), DataError);
  CHECK_THROWS_AS(parse("t,x\n0.1,1\n0.6,2\n1.1,4\n"), DataError);
  CHECK_THROWS_AS(parse("t,x\n0,1\n0.5,abc\n"), DataError);
  CHECK_THROWS_AS(parse("t,x\n0,1\n0.5\n"), DataError);
  CHECK_THROWS_AS(parse("t,x\n0,1\n0.5,nan\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
}
