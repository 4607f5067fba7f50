#include <iostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <CLI11.hpp>

#include "pathlift_cli/commands.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Monte Carlo loops free and reallocate megabytes per scenario; keep it mapped.
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  CLI::App app{"pathlift: path-measure lifts of measure-valued processes"};
  app.require_subcommand(1);
  pathlift::cli::Request req;

  auto common = [&req](CLI::App* sub) {
    sub->add_option("--config", req.config_path, "JSON config file");
    sub->add_option("--seed", req.seed, "base seed (u64)");
    sub->add_option("--out", req.out_dir, "output directory");
    sub->add_option("--preset", req.preset, "preset name");
  };
  for (const char* name : {"norms", "ot", "demo", "sde", "estimate"}) {
    auto* sub = app.add_subcommand(name);
    common(sub);
  }
  auto* lift = app.add_subcommand("lift", "build a dyadic lift and report its energy");
  common(lift);
  lift->add_option("--level", req.level, "dyadic level n");
  lift->add_option("--coupler", req.coupler, "quantile | nu");
  lift->add_option("--alpha", req.alpha, "regularity alpha");
  lift->add_option("--p", req.p, "integrability p");
  lift->add_option("--norm", req.norm, "holder | pvar | frac_sobolev | besov");

  app.get_subcommand("norms")->description("seminorms of paths read from CSV or JSON");
  app.get_subcommand("ot")->description("Wasserstein distances between 1D measures or ensembles");
  app.get_subcommand("demo")->description("heat and stochastic heat equation demos (--preset heat|she)");
  app.get_subcommand("sde")->description("Euler-Maruyama for the conditional SDE presets");
  app.get_subcommand("estimate")->description("Monte Carlo estimators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pathlift::cli::kBadInput;
  }
  req.command = app.get_subcommands().front()->get_name();
  return pathlift::cli::run(req, std::cout, std::cerr);
}
