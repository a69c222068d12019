#pragma once

#include <ostream>
#include <vector>

#include "bss/simulate.hpp"

namespace bss {

/// Sum of |difference|^p over a path prefix. frequency v >= 1 marks second
/// differences at lag v; frequency 0 marks first differences.
struct PowerVariation {
  double p = 2.0;
  int frequency = 1;
  double value = 0.0;
  int count = 0;
};

/// Realized relative power variation V_t / V_T at t = i delta, i = 1..N.
struct RrvPath {
  std::vector<double> times;
  std::vector<double> values;
};

/// X(i d) - 2 X((i-v) d) + X((i-2v) d) for i = 2v..N.
std::vector<double> second_diff(const SamplePath& path, int v);

/// sum_{i=2v}^{floor(t/d)} |second difference at lag v|^p.
PowerVariation power_variation(const SamplePath& path, int v, double p, double t);

/// Same with t = T.
PowerVariation power_variation(const SamplePath& path, int v, double p);

/// sum_{i=1}^{floor(t/d)} |X(i d) - X((i-1) d)|^p.
PowerVariation first_order_variation(const SamplePath& path, double p, double t);
PowerVariation first_order_variation(const SamplePath& path, double p);

/// Throws DegenerateError when V_T^p = 0.
RrvPath rrv(const SamplePath& path, double p);

/// floor(t / step) with a small tolerance so grid times map to their index.
int grid_index(double t, double step);

/// CSV with header t,rrv.
void write_rrv_csv(std::ostream& out, const RrvPath& path);

}  // namespace bss
