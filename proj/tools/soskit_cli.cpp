// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Thin flag-parsing shell over the command layer in soskit/cli.hpp. All
// behavior lives in the library; this file only maps flags onto options
// structs and routes the report stream.
#include <array>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "soskit/cli.hpp"

namespace {

std::array<int, 3> parse_shape(const std::string& s) {
  std::array<int, 3> out{0, 0, 0};
  std::istringstream in(s);
  std::string item;
  int i = 0;
  while (std::getline(in, item, ',')) {
    if (i >= 3) throw soskit::UsageError("--shape expects exactly R,B,C");
    try {
      out[static_cast<std::size_t>(i++)] = std::stoi(item);
    } catch (const std::exception&) {
      throw soskit::UsageError("--shape: cannot parse '" + item + "'");
    }
  }
  if (i != 3) throw soskit::UsageError("--shape expects exactly R,B,C");
  return out;
}

int with_report_stream(const std::string& out_path, const std::function<int(std::ostream&)>& fn) {
  if (out_path.empty()) return fn(std::cout);
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "usage error: cannot write " << out_path << "\n";
    return soskit::exit_usage;
  }
  return fn(f);
}

void add_hyper_flags(CLI::App* cmd, soskit::Hyper* hy) {
  cmd->add_option("--steps", hy->steps, "gradient steps per fit");
  cmd->add_option("--lr-init", hy->lr_init, "initial learning rate");
  cmd->add_option("--lr-final", hy->lr_final, "final learning rate");
  cmd->add_option("--eps-reg", hy->eps_reg, "two-body residual scale");
  cmd->add_option("--lambda-reg", hy->lambda_reg, "one-norm penalty scale");
  cmd->add_option("--e-reg", hy->e_reg, "gap penalty scale");
  cmd->add_option("--seed", hy->seed, "base random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sum-of-squares factorization, spectrum amplification, and cost toolkit"};
  app.require_subcommand(1);

  // --- optimize -------------------------------------------------------------
  soskit::OptimizeOptions oo;
  std::string oo_shape, oo_out;
  auto* opt = app.add_subcommand("optimize", "fit the factorization and summarize it");
  opt->add_option("--input", oo.input, "FCIDUMP, JSON, or binary problem file")->required();
  opt->add_option("--shape", oo_shape, "ranks R,B,C")->required();
  add_hyper_flags(opt, &oo.hyper);
  opt->add_option("--restarts", oo.restarts, "independent seeded restarts");
  opt->add_option("--e-gs", oo.e_gs, "sector ground energy minus the core scalar");
  opt->add_option("--eta", oo.eta, "override the electron count");
  opt->add_option("--threshold", oo.threshold, "selection threshold on the energy proxy, Ha");
  opt->add_option("--checkpoint", oo.checkpoint_path, "write the fitted checkpoint here");
  opt->add_option("--out", oo_out, "write the summary here instead of stdout");
  opt->add_option("--format", oo.format, "json | table");
  opt->add_option("--timestamp", oo.timestamp, "pin the manifest timestamp");

  // --- scan -------------------------------------------------------------
  soskit::ScanOptions so;
  std::string so_grid, so_shape, so_out;
  auto* scan = app.add_subcommand("scan", "sweep shapes and regularizations into a table");
  scan->add_option("--input", so.input, "FCIDUMP, JSON, or binary problem file")->required();
  scan->add_option("--grid", so_grid, "grid spec, e.g. r=2,3;b=4;c=2;ereg=1e6;seed=1,2");
  scan->add_option("--shape", so_shape, "single cell shorthand: R,B,C");
  add_hyper_flags(scan, &so.hyper);
  scan->add_option("--e-gs", so.e_gs, "sector ground energy minus the core scalar");
  scan->add_option("--eta", so.eta, "override the electron count");
  scan->add_option("--workers", so.workers, "parallel fit workers");
  scan->add_option("--out", so_out, "write the table here instead of stdout");
  scan->add_option("--format", so.format, "csv | json");
  scan->add_option("--timestamp", so.timestamp, "pin the manifest timestamp");

  // --- cost -------------------------------------------------------------
  soskit::CostOptions co;
  std::string co_shape, co_out;
  auto* cost = app.add_subcommand("cost", "Toffoli and qubit counts for a walk step");
  cost->add_option("--input", co.checkpoint, "checkpoint to derive shape and normalization from");
  cost->add_option("--problem", co.problem, "problem tensors for the checkpoint route");
  cost->add_option("--e-gs", co.e_gs, "override the checkpoint's stored ground energy");
  cost->add_option("--n", co.n_orb, "orbital count (raw route)");
  cost->add_option("--shape", co_shape, "ranks R,B,C (raw route)");
  cost->add_option("--lambda", co.lambda_cap, "block-encoding normalization, Ha");
  cost->add_option("--e-gap", co.e_gap_value, "shifted ground energy, Ha");
  cost->add_option("--b-rot", co.b_rot, "rotation-angle bits");
  cost->add_option("--b-coeff", co.b_coeff, "coefficient bits");
  cost->add_option("--b-k1", co.b_k1, "outer keep-register bits");
  cost->add_option("--b-k2", co.b_k2, "inner keep-register bits");
  cost->add_option("--sigma-pea", co.sigma_pea, "phase-estimation width target, Ha");
  cost->add_option("--sigma-corr", co.sigma_corr, "representation width term, Ha");
  cost->add_option("--sigma-trunc", co.sigma_trunc, "truncation width term, Ha");
  cost->add_option("--eps-corr", co.eps_corr, "representation bias term, Ha");
  cost->add_option("--eps-trunc", co.eps_trunc, "truncation bias term, Ha");
  cost->add_option("--kappa", co.kappa, "estimator kurtosis for the width correction");
  cost->add_option("--out", co_out, "write the report here instead of stdout");
  cost->add_option("--format", co.format, "table | json");
  cost->add_option("--timestamp", co.timestamp, "pin the manifest timestamp");

  // --- verify -----------------------------------------------------------
  soskit::VerifyOptions vo;
  std::string vo_out;
  auto* ver = app.add_subcommand("verify", "check the operator identities at desk scale");
  ver->add_option("--input", vo.checkpoint, "checkpoint to verify")->required();
  ver->add_option("--problem", vo.problem, "problem tensors the checkpoint was fit to")->required();
  ver->add_option("--tol", vo.tol, "identity tolerance");
  ver->add_option("--gap-tol", vo.gap_tol, "gap cross-check tolerance");
  ver->add_flag("--with-sdp", vo.with_sdp, "also cross-check the certified lower bound");
  ver->add_option("--sdp-seed", vo.sdp_seed, "seed for the lower-bound solve");
  ver->add_option("--out", vo_out, "write the report here instead of stdout");
  ver->add_option("--format", vo.format, "json | table");
  ver->add_option("--timestamp", vo.timestamp, "pin the manifest timestamp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : soskit::exit_usage;
  }

  try {
    if (opt->parsed()) {
      const auto s = parse_shape(oo_shape);
      oo.rank_r = s[0];
      oo.rank_b = s[1];
      oo.rank_c = s[2];
      return with_report_stream(oo_out,
                                [&](std::ostream& rep) { return cmd_optimize(oo, rep, std::cerr); });
    }
    if (scan->parsed()) {
      if (!so_grid.empty()) soskit::parse_grid_spec(so_grid, &so);
      if (!so_shape.empty()) {
        const auto s = parse_shape(so_shape);
        so.r_list.push_back(s[0]);
        so.b_list.push_back(s[1]);
        so.c_list.push_back(s[2]);
      }
      return with_report_stream(so_out,
                                [&](std::ostream& rep) { return cmd_scan(so, rep, std::cerr); });
    }
    if (cost->parsed()) {
      if (!co_shape.empty()) {
        const auto s = parse_shape(co_shape);
        co.rank_r = s[0];
        co.rank_b = s[1];
        co.rank_c = s[2];
      }
      return with_report_stream(co_out,
                                [&](std::ostream& rep) { return cmd_cost(co, rep, std::cerr); });
    }
    const auto run_verify = [&](std::ostream& rep) { return cmd_verify(vo, rep, std::cerr); };
    return with_report_stream(vo_out, run_verify);
  } catch (const soskit::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return soskit::exit_usage;
  }
}
