// mlt-cli: CDMA experiments, tensor-network export and self-verification.
//
// Exit codes: 0 ok, 1 usage, 2 configuration or I/O, 3 numerical failure.

#include "mlt/cdma.hpp"
#include "mlt/experiment_io.hpp"
#include "mlt/tn_export.hpp"
#include "mlt/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace {

enum Exit : int { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_numerical = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

struct SimFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_bits;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config (defaults to the built-in experiment setup)")->envname("MLT_CONFIG");
  cmd->add_option("--out", f.out, "CSV output path (stdout when omitted)")->envname("MLT_OUT");
  cmd->add_option("--seed", f.seed, "master seed, overrides the config")->envname("MLT_SEED");
  cmd->add_option("--threads", f.threads, "worker threads; results do not depend on it")
      ->envname("MLT_THREADS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-bits", f.max_bits, "bit cap per sweep point, overrides the config")
      ->envname("MLT_MAX_BITS")
      ->check(CLI::PositiveNumber);
}

int run_sim(const SimFlags& f, mlt::cdma::CdmaConfig base) {
  auto cfg = f.config.empty() ? base : mlt::io::parse_cdma_config(read_file(f.config), base);
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.max_bits) cfg.max_bits = *f.max_bits;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw mlt::io::ConfigError(e.what());
  }
  write_output(f.out, mlt::io::to_csv(mlt::cdma::run_monte_carlo(cfg, f.threads)));
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilinear algebra toolkit: CDMA receiver experiments, tensor-network export, oracle checks"};
  app.require_subcommand(1);

  SimFlags snr_flags, users_flags;
  auto* snr = app.add_subcommand("ber-vs-snr", "BER/NMSE of the three receivers over an SNR grid");
  add_sim_flags(snr, snr_flags);
  auto* users = app.add_subcommand("ber-vs-users", "BER/NMSE of the three receivers over the number of users");
  add_sim_flags(users, users_flags);

  std::string spec_path, dot_out;
  auto* tn = app.add_subcommand("export-tn", "write a tensor-network diagram as Graphviz text");
  tn->add_option("--config,--spec", spec_path, "JSON network spec")->required();
  tn->add_option("--out", dot_out, ".dot output path (stdout when omitted)");

  std::uint64_t verify_seed = 20240601;
  std::size_t verify_instances = 50;
  bool inject_fault = false;
  auto* ver = app.add_subcommand("verify", "run the oracle suites and report the largest residuals");
  ver->add_option("--seed", verify_seed, "seed of the random instances")->envname("MLT_SEED");
  ver->add_option("--instances", verify_instances, "instances per suite")->check(CLI::PositiveNumber);
  ver->add_flag("--inject-fault", inject_fault, "check the harness by corrupting the Einstein product");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*snr) return run_sim(snr_flags, mlt::cdma::CdmaConfig::experiment1());
    if (*users) return run_sim(users_flags, mlt::cdma::CdmaConfig::experiment2());
    if (*tn) {
      const auto spec = mlt::tn::parse_network_spec(read_file(spec_path));
      write_output(dot_out, mlt::tn::to_dot(spec));
      return exit_ok;
    }
    if (*ver) {
      mlt::verify::Options opt;
      opt.seed = verify_seed;
      opt.instances = verify_instances;
      if (inject_fault) opt.einstein = mlt::verify::corrupted_einstein_product;
      const auto results = mlt::verify::run_all(opt);
      std::cout << mlt::verify::format_report(results);
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
      std::cout << (ok ? "verify: all suites passed\n" : "verify: FAILED\n");
      return ok ? exit_ok : exit_numerical;
    }
  } catch (const mlt::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const mlt::tn::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return exit_config;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return exit_config;
  } catch (const mlt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_usage;
}
