// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end walk through the pipeline at desk scale: plant a factorizable
// problem, fit it back, build the sum-of-squares decomposition, check the
// walk spectrum against the dense oracle, and price a walk step.
#include <iomanip>
#include <iostream>

#include "soskit/cli.hpp"

using namespace soskit;

int main() {
  std::cout << std::setprecision(10);

  // A 3-orbital, 2-electron instance whose two-body tensor is exactly the
  // contraction of a random (R,B,C) = (1,2,1) parameter set.
  const int n = 3, eta = 2;
  RandomStream rng(7);
  DfthcParams target = DfthcParams::zeros(n, 1, 2, 1);
  {
    RandomStream init(41);
    target = random_init(n, 1, 2, 1, init);
    target.beta1 = 0.0;
    target.h_sym.setZero();
  }
  Problem prob = Problem::zeros(n, eta);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) prob.h1(a, b) = prob.h1(b, a) = rng.normal(0.0, 0.3);
  prob.h2 = contract_h2(target);

  std::cout << "== fit ==\n";
  Hyper hy;
  hy.eps_reg = 1.0;
  hy.lambda_reg = 1e6;
  hy.e_reg = 1e6;
  hy.lr_init = 0.05;
  hy.lr_final = 1e-5;
  hy.steps = 4000;
  hy.seed = 3;
  const OptimizeResult fit = optimize(prob, 1, 2, 1, hy);
  std::cout << "loss " << fit.loss_trace.front() << " -> " << fit.final_loss
            << " over " << hy.steps << " steps\n";
  std::cout << "two-body residual (Frobenius): " << fit.final_breakdown.residual_fro << "\n";

  std::cout << "\n== decomposition ==\n";
  const SosDecomposition dec = make_decomposition(fit.params, prob, fit.e_gs);
  std::cout << "generators: " << dec.generator_count() << ", e_sos " << dec.e_sos
            << ", lambda " << dec.lambda_total << ", e_gap " << dec.e_gap << "\n";
  const SosIdentityReport idr = verify_sos_identity(fit.params, prob);
  std::cout << "operator identity residual: " << idr.sos_residual
            << " (fit error " << idr.fit_residual << ")\n";

  std::cout << "\n== walk ==\n";
  const BlockEncoding be = encode_rectangular(dec, n);
  const WalkTwiceReport wt = walk_twice(be);
  double worst = wt.block_residual;
  for (const auto& ph : wt.phases) worst = std::max(worst, ph.residual);
  std::cout << wt.phases.size() << " eigenphase pairs, worst defect " << worst << "\n";

  std::cout << "\n== cost of one walk step ==\n";
  CostInputs in;
  in.n_orb = n;
  in.rank_r = 1;
  in.rank_b = 2;
  in.rank_c = 1;
  in.lambda_cap = dec.lambda_total;
  in.e_gap = std::max(dec.e_gap, 0.0);
  const CostReport cr = block_encoding_cost(in);
  std::cout << cr.total_toffoli << " toffoli, " << cr.total_qubits << " qubits\n";
  if (in.e_gap > 0.0) {
    const double leff = lambda_eff(in.lambda_cap, in.e_gap);
    const PeaCost pe = pea_cost(leff, 1e-3, cr.total_toffoli);
    std::cout << "phase estimation at 1 mHa: " << pe.queries << " queries, "
              << pe.total_toffoli << " total toffoli\n";
  }
  return 0;
}
