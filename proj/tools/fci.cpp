// fci: command-line front end for the finite-size chiral index experiments.
//
//   fci index     --config cfg.json             single IndexReport row
//   fci scan      --config cfg.json             one row per scan point
//   fci bounds    --config cfg.json             locality certificates
//   fci reproduce fig3|fig4 [--seed N]          figure tables (+ SVG)
//   fci check     --config cfg.json             self-tests on the configured model
//
// Exit codes: 0 ok, 1 config error, 2 numerical failure, 3 self-check failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fci/experiment.hpp"
#include "fci/plot.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheck = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string plot;
  bool log_y = false;
  bool reproducible = false;
  int threads = 1;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fci::ConfigError("--out", "cannot write " + path);
  f << text;
}

fci::ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw fci::ConfigError("--config", "a config file is required");
  return fci::load_config(o.config, o.seed);
}

void emit(const fci::ResultTable& t, const Options& o, const fci::ExperimentConfig& c, fci::PlotKind kind) {
  const std::string path = !o.out.empty() ? o.out : c.output;
  if (path.empty()) {
    std::cout << t.to_csv();
  } else {
    write_file(path, t.to_csv());
  }
  if (!o.plot.empty()) {
    fci::PlotOptions po;
    po.log_y = o.log_y;
    write_file(o.plot, fci::emit_plot(t, kind, po));
  }
}

fci::RunOptions run_options(const Options& o) { return {std::max(1, o.threads), o.reproducible}; }

int cmd_index(const Options& o) {
  const auto c = load(o);
  if (c.scan != fci::ScanAxis::None) throw fci::ConfigError("scan", "index needs scan \"none\"; use the scan subcommand");
  emit(fci::run(c, run_options(o)), o, c, fci::PlotKind::Line);
  return 0;
}

int cmd_scan(const Options& o) {
  const auto c = load(o);
  emit(fci::run(c, run_options(o)), o, c, fci::PlotKind::Line);
  return 0;
}

int cmd_bounds(const Options& o) {
  const auto c = load(o);
  const auto t = fci::bounds_table(c, run_options(o));
  const std::string path = !o.out.empty() ? o.out : c.output;
  if (path.empty()) {
    std::cout << t.to_csv();
  } else {
    write_file(path, t.to_csv());
  }
  const int pass_col = t.column("pass");
  for (const auto& r : t.rows) {
    if (r[pass_col] != "true") {
      std::cerr << "bound " << r[0] << " failed\n";
      return kExitCheck;
    }
  }
  return 0;
}

int cmd_reproduce(const Options& o, const std::string& figure) {
  const std::uint64_t seed = o.seed.value_or(1);
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  auto save = [&](const fci::ResultTable& t, const std::string& stem, fci::PlotKind kind, fci::PlotOptions po) {
    write_file((dir / (stem + ".csv")).string(), t.to_csv());
    write_file((dir / (stem + ".svg")).string(), fci::emit_plot(t, kind, po));
    std::cerr << "wrote " << (dir / stem).string() << ".{csv,svg}\n";
  };
  if (figure == "fig3") {
    const auto tabs = fci::reproduce_fig3(seed, run_options(o));
    save(tabs.scan, "fig3_length_scan", fci::PlotKind::Line, {"L", "q_error", true, "quantization error vs L"});
    save(tabs.profile, "fig3_density", fci::PlotKind::PerSite, {"cell", "value", false, "index densities, L=30"});
  } else {
    const auto tabs = fci::reproduce_fig4(seed, run_options(o));
    save(tabs.scan, "fig4_switch_scan", fci::PlotKind::Line, {"ell", "I_edge", false, "edge index vs switch position"});
    save(tabs.profile, "fig4_delta_scan", fci::PlotKind::Line, {"delta", "q_error", true, "quantization error vs delta"});
  }
  return 0;
}

// Hermiticity, chirality, spectral symmetry, the bulk-edge identity and the
// tanh cross-check, on every scan point of the config.
int cmd_check(const Options& o) {
  const auto c = load(o);
  bool ok = true;
  auto report = [&](const std::string& what, double value, double tol) {
    const bool pass = value < tol;
    ok = ok && pass;
    std::printf("%-4s %-28s %.3e (tol %.0e)\n", pass ? "ok" : "FAIL", what.c_str(), value, tol);
  };
  for (const auto& p : fci::scan_points(c)) {
    std::printf("# L=%d ell=%s\n", p.length, p.ell ? std::to_string(*p.ell).c_str() : "middle");
    fci::PointModel m = [&] {
      try {
        return fci::point_model(c, p.length);
      } catch (const fci::NotHermitian& e) {
        throw fci::NumericalFailure(e.what());
      }
    }();
    const fci::Matrix& h = m.hamiltonian.matrix();
    const fci::Vector& cs = m.hamiltonian.chiral().signs();
    const double scale = std::max(1.0, fci::max_abs(h));
    report("hermiticity", fci::hermiticity_residual(h) / scale, 1e-12);
    report("chirality", fci::max_abs(cs.asDiagonal() * h + h * cs.asDiagonal()) / scale, 1e-12);
    const auto spec = fci::eigh(h);
    const auto& ev = spec.eigenvalues;
    report("spectral symmetry", (ev + ev.reverse()).cwiseAbs().maxCoeff() / scale, 1e-10);
    const double delta = fci::resolve_delta(fci::point_policy(c, m, p));
    const auto r = fci::index_report(m.hamiltonian, fci::DeltaPolicy::manual(delta), p.ell);
    report("bulk-edge identity", r.correspondence_residual, fci::kResidualTolerance);
    const double ratio = h.cwiseAbs().rowwise().sum().maxCoeff() / delta;
    if (ratio <= fci::kOracleMaxRatio) {
      const auto s = fci::flattened_sign(spec, fci::FilterParams(delta));
      report("tanh oracle agreement", fci::max_abs(s - fci::tanh_oracle(h, delta)), 1e-8);
    } else {
      std::printf("skip tanh oracle agreement     ||H||/delta = %.1f > %.0f\n", ratio, fci::kOracleMaxRatio);
    }
  }
  return ok ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-size bulk and edge indices of chiral chains"};
  app.require_subcommand(1);
  Options o;
  std::string figure;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "JSON experiment config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "disorder seed (overrides the config)");
    sub->add_option("--out", o.out, "output CSV path (directory for reproduce)");
    sub->add_flag("--reproducible", o.reproducible, "omit the timestamp comment");
    sub->add_option("--threads", o.threads, "worker threads for scans")->check(CLI::PositiveNumber);
  };
  auto* index = app.add_subcommand("index", "evaluate one configuration");
  auto* scan = app.add_subcommand("scan", "run a parameter scan");
  auto* bounds = app.add_subcommand("bounds", "locality certificates");
  auto* reproduce = app.add_subcommand("reproduce", "regenerate figure tables");
  auto* check = app.add_subcommand("check", "self-tests on a configured model");
  for (auto* s : {index, scan, bounds, check}) common(s, true);
  common(reproduce, false);
  for (auto* s : {index, scan}) {
    s->add_option("--plot", o.plot, "also write an SVG plot");
    s->add_flag("--log-y", o.log_y, "log-scale y axis for --plot");
  }
  reproduce->add_option("figure", figure, "fig3 or fig4")->required()->check(CLI::IsMember({"fig3", "fig4"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*index) return cmd_index(o);
    if (*scan) return cmd_scan(o);
    if (*bounds) return cmd_bounds(o);
    if (*reproduce) return cmd_reproduce(o, figure);
    if (*check) return cmd_check(o);
  } catch (const fci::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fci::InvalidProfile& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fci::InvalidSwitch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fci::InvalidGeometry& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
