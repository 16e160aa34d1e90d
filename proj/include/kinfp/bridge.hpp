// Copyright 2026 The kinfp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "kinfp/gaussian_kernel.hpp"

namespace kinfp {

/// Conditional law of the intermediate state of one coordinate pair, given a
/// start (ax, av) and an end point (yx, yv) reached after gaps gap1 and gap2.
/// P(a; w) P(w; y) = P(a; y) N(w; mean, cov).
struct BridgeBlock {
  double mean_x = 0.0, mean_v = 0.0;
  Block cov;
  Block chol;
};

/// Precision pieces that depend only on the two gaps.
struct BridgeGaps {
  double gap1 = 0.0, gap2 = 0.0;
  Block inv1;  // inverse covariance over gap1
  Block inv2;  // inverse covariance over gap2
  Block cov;   // bridge covariance
  Block chol;

  BridgeGaps() = default;
  BridgeGaps(double scale, double g1, double g2) : gap1(g1), gap2(g2) {
    inv1 = covariance_block(scale, g1).inverse();
    inv2 = covariance_block(scale, g2).inverse();
    // A^T inv2 A with A = [[1, g2], [0, 1]]
    const Block ata{inv2.xx, inv2.xx * g2 + inv2.xv, inv2.xx * g2 * g2 + 2.0 * inv2.xv * g2 + inv2.vv};
    const Block prec{inv1.xx + ata.xx, inv1.xv + ata.xv, inv1.vv + ata.vv};
    cov = prec.inverse();
    chol = cov.cholesky();
  }

  /// Bridge mean for one coordinate pair.
  void mean(double ax, double av, double yx, double yv, double& mx, double& mv) const {
    const double m1x = ax + gap1 * av, m1v = av;
    const double bx = inv1.xx * m1x + inv1.xv * m1v;
    const double bv = inv1.xv * m1x + inv1.vv * m1v;
    const double qx = inv2.xx * yx + inv2.xv * yv;
    const double qv = inv2.xv * yx + inv2.vv * yv;
    const double rx = bx + qx, rv = bv + gap2 * qx + qv;
    mx = cov.xx * rx + cov.xv * rv;
    mv = cov.xv * rx + cov.vv * rv;
  }
};

inline BridgeBlock bridge_block(double scale, double gap1, double gap2, double ax, double av, double yx, double yv) {
  const BridgeGaps g(scale, gap1, gap2);
  BridgeBlock b;
  g.mean(ax, av, yx, yv, b.mean_x, b.mean_v);
  b.cov = g.cov;
  b.chol = g.chol;
  return b;
}

}  // namespace kinfp
