// Command-line front end: verification runs, surface integrals, oracle
// sweeps, and chart certificates, all driven by a JSON config.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "momap/critical.hpp"
#include "momap/harness.hpp"
#include "momap/oracle.hpp"
#include "momap/resolution.hpp"

using namespace momap;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "path to a run config (json)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads,
                  "worker thread count (wall time only; results are a "
                  "function of the config alone)");
}

RunConfig load(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.threads > 0) {
#ifdef _OPENMP
    omp_set_num_threads(args.threads);
#endif
  }
  return cfg;
}

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << body;
}

// One certificate per chart branch; the overall verdict requires every
// structural check in every branch.
bool run_certificates(const RunConfig& cfg, const std::string& out_dir,
                      bool verbose) {
  const GroupAction a = action_from_config(cfg.action);
  const auto branches = build_isotropy_tree(a, cfg.seed);
  bool all = true;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const nlohmann::json cert =
        branch_certificate(a, branches[i], CertificateOptions{}, cfg.seed);
    const bool pass = cert.at("theorem1_pass").get<bool>() &&
                      cert.at("theorem2_kernel_dims").at("pass").get<bool>() &&
                      cert.at("jacobian_exponents").at("pass").get<bool>() &&
                      cert.at("lemma3_pass").get<bool>();
    all = all && pass;
    const std::filesystem::path p = std::filesystem::path(out_dir) /
                                    "certificates" /
                                    (a.name() + "_branch" + std::to_string(i) + ".json");
    write_text(p, cert.dump(2) + "\n");
    if (verbose)
      std::cout << "branch " << i << " (depth "
                << cert.at("branch").at("depth").get<int>()
                << "): " << (pass ? "pass" : "FAIL") << " -> " << p.string()
                << "\n";
  }
  return all;
}

int run_verify(const CommonArgs& args, bool with_certificates) {
  const RunConfig cfg = load(args);
  const PipelineResult r = verify_pipeline(cfg);
  emit_report(r, args.out_dir);
  std::cout << "kappa = " << r.kappa << ", surface L0 = " << r.l0.L0;
  if (!r.l0.empty_support)
    std::cout << ", fitted L0 = " << r.fit.L0_fitted
              << ", fitted exponent = " << r.fit.kappa_fitted;
  std::cout << "\n";
  for (const auto& v : r.verdicts) std::cout << v << "\n";
  for (const auto& w : r.l0.warnings) std::cout << "note: " << w << "\n";
  bool ok = r.pass;
  if (with_certificates) ok = run_certificates(cfg, args.out_dir, true) && ok;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "equivariant oscillatory-integral toolkit: leading-order asymptotics "
      "of moment-map phases with chart certificates"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* verify = app.add_subcommand(
      "verify", "surface integral + oracle sweep + leading-term fit");
  CLI::App* analyze = app.add_subcommand(
      "analyze", "verify plus chart certificates for every branch");
  CLI::App* l0 =
      app.add_subcommand("l0", "surface integral of the leading coefficient");
  CLI::App* oracle =
      app.add_subcommand("oracle", "reference sweep of the integral I(mu)");
  CLI::App* resolve = app.add_subcommand(
      "resolve-check", "chart certificates for every branch of the action");
  for (CLI::App* c : {verify, analyze, l0, oracle, resolve}) add_common(c, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) return run_verify(args, false);
    if (app.got_subcommand(analyze)) return run_verify(args, true);

    if (app.got_subcommand(l0)) {
      const RunConfig cfg = load(args);
      const GroupAction a = action_from_config(cfg.action);
      const int kappa = principal_orbit_dimension(a, 400, cfg.seed);
      const Amplitude amp = amplitude_from_config(cfg.amplitude, a.n(), a.d());
      const ExecMode mode =
          cfg.exec.mode == "serial" ? ExecMode::serial : ExecMode::parallel;
      const L0Result r = integrate_L0(a, amp, kappa, cfg.surface, cfg.seed,
                                      mode, cfg.exec.n_shards);
      nlohmann::json j{{"kappa", kappa},
                       {"L0", r.L0},
                       {"err_estimate", r.err_estimate},
                       {"method", r.method},
                       {"n_accepted", r.n_accepted},
                       {"contamination_fraction", r.contamination_fraction},
                       {"max_abs_signature", r.max_abs_signature},
                       {"empty_support", r.empty_support},
                       {"warnings", r.warnings},
                       {"details", r.details}};
      write_text(std::filesystem::path(args.out_dir) / "l0.json",
                 j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand(oracle)) {
      const RunConfig cfg = load(args);
      const GroupAction a = action_from_config(cfg.action);
      const Amplitude amp = amplitude_from_config(cfg.amplitude, a.n(), a.d());
      const ExecMode mode =
          cfg.exec.mode == "serial" ? ExecMode::serial : ExecMode::parallel;
      const std::vector<double> grid = make_mu_grid(cfg.mu_grid);
      const Oracle o(a, amp, cfg.oracle, grid.front());
      std::vector<OracleRow> rows;
      for (double mu : grid) {
        rows.push_back(o.eval(mu, mode, cfg.exec.n_shards));
        std::cout << "mu = " << mu << ": I = " << rows.back().value.real()
                  << (rows.back().value.imag() < 0 ? " - " : " + ")
                  << std::abs(rows.back().value.imag()) << "i  (err "
                  << rows.back().err_estimate << ")\n";
      }
      write_text(std::filesystem::path(args.out_dir) / "sweep.csv",
                 sweep_csv(rows));
      return 0;
    }

    if (app.got_subcommand(resolve)) {
      const RunConfig cfg = load(args);
      const bool ok = run_certificates(cfg, args.out_dir, true);
      std::cout << (ok ? "PASS" : "FAIL") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
