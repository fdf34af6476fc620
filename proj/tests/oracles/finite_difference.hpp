// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite differences over a flat parameter vector, for gradient
// cross-checks.
#pragma once

#include <functional>
#include <vector>

namespace oracle {

// df/dx_i by central differences with the given step.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step = 1e-6) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double fp = f(x);
    x[i] = x0 - step;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace oracle
