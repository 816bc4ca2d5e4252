#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lrm/analysis.hpp"
#include "lrm/io.hpp"

namespace lrm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit-code convention: 0 success, 1 runtime failure, 2 usage/precondition
// error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  Eigen::Index n = 16;
  Eigen::Index r = 1;
  Eigen::Index m = 0;
  std::vector<Eigen::Index> n_list, r_list, m_grid;
  NormIndex q = NormIndex::L2;
  double eta = 0.0;
  std::vector<double> eta_list, alpha_list;
  NoiseModel noise_model = NoiseModel::ScaledGaussian;
  std::string spectrum = "unit-signs";
  double alpha = 1.0;
  int trials = 20;
  std::uint64_t seed = 0;
  double success_tol = 1e-3;
  std::string kind = "tight";  // sample-frame ensemble kind
  std::string output = "run";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  SolverConfig solver;
};

namespace detail {

template <typename T>
T parse_scalar(const std::string& tok) {
  std::istringstream in(tok);
  T value{};
  in >> value;
  if (in.fail() || !in.eof())
    throw UsageError("malformed value '" + tok + "'");
  return value;
}

// Grid syntax: comma-separated values, or start:stop:step (stop inclusive
// when it lands on the grid).
template <typename T>
std::vector<T> parse_grid(const std::string& text) {
  std::vector<T> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string::npos) {
    std::istringstream in(text);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
        !std::getline(in, c))
      throw UsageError("malformed range '" + text + "' (want start:stop:step)");
    const T start = parse_scalar<T>(a);
    const T stop = parse_scalar<T>(b);
    const T step = parse_scalar<T>(c);
    if (step <= T(0)) throw UsageError("range step must be positive");
    for (double v = static_cast<double>(start);
         v <= static_cast<double>(stop) + 1e-12;
         v += static_cast<double>(step))
      out.push_back(static_cast<T>(v));
    return out;
  }
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(parse_scalar<T>(tok));
  return out;
}

inline NormIndex parse_q(const std::string& text) {
  if (text == "1") return NormIndex::L1;
  if (text == "2") return NormIndex::L2;
  if (text == "inf") return NormIndex::LInf;
  throw UsageError("unsupported q '" + text + "' (want 1, 2 or inf)");
}

inline NoiseModel parse_noise_model(const std::string& text) {
  if (text == "scaled-gaussian") return NoiseModel::ScaledGaussian;
  if (text == "uniform-box") return NoiseModel::UniformBox;
  if (text == "zero") return NoiseModel::AdversarialZero;
  throw UsageError("unsupported noise model '" + text + "'");
}

inline SpectrumModel parse_spectrum(const std::string& text, double alpha) {
  if (text == "unit-signs") return {SpectrumKind::UnitSigns, 0.0};
  if (text == "uniform-positive") return {SpectrumKind::UniformPositive, 0.0};
  if (text == "power-decay") return {SpectrumKind::PowerDecay, alpha};
  throw UsageError("unsupported spectrum '" + text + "'");
}

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace detail

inline CLI::App* add_common_solver_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--max-iter", cfg.solver.max_iter,
                  "solver iteration cap")->capture_default_str();
  sub->add_option("--tol-primal", cfg.solver.tol_primal,
                  "relative primal iterate change tolerance")->capture_default_str();
  sub->add_option("--tol-dual", cfg.solver.tol_dual,
                  "relative dual iterate change tolerance")->capture_default_str();
  sub->add_option("--step-ratio", cfg.solver.step_ratio,
                  "primal/dual step balance sigma/tau")->capture_default_str();
  sub->add_option("-o,--output", cfg.output,
                  "output prefix (<prefix>.csv, <prefix>.manifest.json)")
      ->capture_default_str();
  sub->add_option("--threads", cfg.threads, "worker threads for trials")
      ->capture_default_str();
  return sub;
}

// Parses argv (without the program name). Throws UsageError on any problem;
// no computation happens on the error path.
inline RunConfig parse_args(const std::vector<std::string>& argv) {
  RunConfig cfg;
  CLI::App app{"low-rank recovery from rank-one tight-frame measurements"};
  app.require_subcommand(1);

  std::string q_text = "2";
  std::string noise_text = "scaled-gaussian";
  std::string n_grid_text, r_grid_text, m_grid_text, eta_grid_text,
      alpha_grid_text;

  auto* sample = app.add_subcommand("sample-frame",
                                    "sample a measurement ensemble to a file");
  sample->add_option("--m", cfg.m, "number of measurement vectors")->required();
  sample->add_option("--n", cfg.n, "ambient dimension")->required();
  sample->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sample->add_option("--kind", cfg.kind, "ensemble kind: tight | gaussian")
      ->capture_default_str();
  sample->add_option("-o,--output", cfg.output, "output prefix")
      ->capture_default_str();

  auto* rec = app.add_subcommand("recover", "solve one seeded recovery instance");
  rec->add_option("--n", cfg.n, "ambient dimension")->required();
  rec->add_option("--r", cfg.r, "instance rank")->capture_default_str();
  rec->add_option("--m", cfg.m, "number of measurements")->required();
  rec->add_option("--q", q_text, "constraint norm: 1, 2 or inf")
      ->capture_default_str();
  rec->add_option("--eta", cfg.eta, "noise level")->capture_default_str();
  rec->add_option("--noise-model", noise_text,
                  "scaled-gaussian | uniform-box | zero")->capture_default_str();
  rec->add_option("--spectrum", cfg.spectrum,
                  "unit-signs | uniform-positive | power-decay")
      ->capture_default_str();
  rec->add_option("--alpha", cfg.alpha, "power-decay exponent")
      ->capture_default_str();
  rec->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  rec->add_option("--success-tol", cfg.success_tol,
                  "relative error threshold for success")->capture_default_str();
  rec->add_option("--trace", cfg.solver.trace_path,
                  "write per-checkpoint iteration trace CSV");
  add_common_solver_flags(rec, cfg);

  auto* pt = app.add_subcommand("phase-transition",
                                "success fraction across an (n, r, m) grid");
  pt->add_option("--n", n_grid_text, "n grid (comma list or start:stop:step)")
      ->required();
  pt->add_option("--r", r_grid_text, "r grid")->required();
  pt->add_option("--m", m_grid_text, "m grid")->required();
  pt->add_option("--trials", cfg.trials, "trials per cell")->capture_default_str();
  pt->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  pt->add_option("--success-tol", cfg.success_tol,
                 "relative error threshold for success")->capture_default_str();
  add_common_solver_flags(pt, cfg);

  auto* ns = app.add_subcommand("noise-sweep",
                                "error vs noise level at fixed geometry");
  ns->add_option("--n", cfg.n, "ambient dimension")->required();
  ns->add_option("--r", cfg.r, "instance rank")->capture_default_str();
  ns->add_option("--m", cfg.m, "number of measurements")->required();
  ns->add_option("--q", q_text, "constraint norm: 1, 2 or inf")
      ->capture_default_str();
  ns->add_option("--eta", eta_grid_text, "eta grid")->required();
  ns->add_option("--trials", cfg.trials, "trials per eta")->capture_default_str();
  ns->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  ns->add_option("--success-tol", cfg.success_tol,
                 "relative error threshold for success")->capture_default_str();
  add_common_solver_flags(ns, cfg);

  auto* st = app.add_subcommand(
      "stability-sweep", "error vs spectral tail on power-decay instances");
  st->add_option("--n", cfg.n, "ambient dimension")->required();
  st->add_option("--r", cfg.r, "target rank")->capture_default_str();
  st->add_option("--m", cfg.m, "number of measurements")->required();
  st->add_option("--alpha", alpha_grid_text, "power-decay exponent grid")
      ->required();
  st->add_option("--trials", cfg.trials, "trials per alpha")->capture_default_str();
  st->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  st->add_option("--success-tol", cfg.success_tol,
                 "relative error threshold for success")->capture_default_str();
  add_common_solver_flags(st, cfg);

  auto* np = app.add_subcommand("nsp-probe",
                                "randomized null-space-property falsifier");
  np->add_option("--n", cfg.n, "ambient dimension")->required();
  np->add_option("--m", cfg.m, "number of measurements")->required();
  np->add_option("--r", cfg.r, "NSP order")->capture_default_str();
  np->add_option("--q", q_text, "image norm: 1, 2 or inf")->capture_default_str();
  np->add_option("--kind", cfg.kind, "ensemble kind: tight | gaussian")
      ->capture_default_str();
  np->add_option("--trials", cfg.trials, "probe directions")->capture_default_str();
  np->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  np->add_option("-o,--output", cfg.output, "output prefix")
      ->capture_default_str();

  if (argv.empty()) throw UsageError(app.help());

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& err) {
    throw UsageError(std::string(err.what()) + "\n\n" + app.help());
  }

  cfg.command = app.get_subcommands().front()->get_name();
  cfg.q = detail::parse_q(q_text);
  cfg.noise_model = detail::parse_noise_model(noise_text);
  if (cfg.command == "phase-transition") {
    cfg.n_list = detail::parse_grid<Eigen::Index>(n_grid_text);
    cfg.r_list = detail::parse_grid<Eigen::Index>(r_grid_text);
    cfg.m_grid = detail::parse_grid<Eigen::Index>(m_grid_text);
  }
  if (cfg.command == "noise-sweep")
    cfg.eta_list = detail::parse_grid<double>(eta_grid_text);
  if (cfg.command == "stability-sweep")
    cfg.alpha_list = detail::parse_grid<double>(alpha_grid_text);
  if (cfg.threads < 1) cfg.threads = 1;
  if (cfg.trials < 0) throw UsageError("--trials must be >= 0");
  if (cfg.eta < 0) throw UsageError("--eta must be >= 0");
  if (cfg.kind != "tight" && cfg.kind != "gaussian")
    throw UsageError("--kind must be tight or gaussian");
  detail::parse_spectrum(cfg.spectrum, cfg.alpha);  // validate
  return cfg;
}

namespace detail {

inline nlohmann::json base_manifest(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["root_seed"] = cfg.seed;
  j["q"] = lrm::to_string(cfg.q);
  j["success_tol"] = cfg.success_tol;
  j["trials"] = cfg.trials;
  j["threads"] = cfg.threads;
  j["solver"] = {{"max_iter", cfg.solver.max_iter},
                 {"tol_primal", cfg.solver.tol_primal},
                 {"tol_dual", cfg.solver.tol_dual},
                 {"step_ratio", cfg.solver.step_ratio}};
  j["tool_version"] = kToolVersion;
  j["timestamp"] = timestamp();
  return j;
}

inline double success_fraction(const ExperimentTable& table) {
  if (table.rows.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& row : table.rows) ok += row.success ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(table.rows.size());
}

}  // namespace detail

// Dispatches a parsed config. Returns the process exit code.
inline int run(const RunConfig& cfg) {
  if (cfg.command == "sample-frame") {
    const MeasurementEnsemble e =
        cfg.kind == "tight" ? tight_frame_ensemble(cfg.m, cfg.n, cfg.seed)
                            : gaussian_ensemble(cfg.m, cfg.n, cfg.seed);
    save_ensemble(cfg.output + ".frame.txt", e);
    auto manifest = detail::base_manifest(cfg);
    manifest["kind"] = lrm::to_string(e.kind);
    manifest["m"] = e.m;
    manifest["n"] = e.n;
    write_manifest(cfg.output + ".manifest.json", manifest);
    const MatX gram =
        e.vectors.transpose() * e.vectors -
        static_cast<double>(e.m) * MatX::Identity(e.n, e.n);
    std::cout << "sampled " << lrm::to_string(e.kind) << " ensemble m=" << e.m
              << " n=" << e.n << " tightness_err="
              << (e.kind == EnsembleKind::TightFrame
                      ? gram.cwiseAbs().maxCoeff()
                      : std::nan(""))
              << '\n';
    return 0;
  }

  if (cfg.command == "recover") {
    TrialSpec spec;
    spec.n = cfg.n;
    spec.r = cfg.r;
    spec.m = cfg.m;
    spec.q = cfg.q;
    spec.eta = cfg.eta;
    spec.noise_model = cfg.noise_model;
    spec.spectrum = detail::parse_spectrum(cfg.spectrum, cfg.alpha);
    spec.seed = cfg.seed;
    ExperimentTable table;
    table.success_tol = cfg.success_tol;
    table.rows.push_back(run_trial(spec, cfg.solver, cfg.success_tol));
    const auto& row = table.rows.front();
    write_csv(cfg.output + ".csv", table);
    auto manifest = detail::base_manifest(cfg);
    manifest["n"] = cfg.n;
    manifest["r"] = cfg.r;
    manifest["m"] = cfg.m;
    manifest["eta"] = cfg.eta;
    manifest["noise_model"] = lrm::to_string(cfg.noise_model);
    manifest["spectrum"] = lrm::to_string(spec.spectrum);
    write_manifest(cfg.output + ".manifest.json", manifest);
    std::cout << "rel_err=" << row.rel_err << " success=" << row.success
              << " iterations=" << row.iterations << '\n';
    return std::isfinite(row.rel_err) ? 0 : 1;
  }

  if (cfg.command == "phase-transition" || cfg.command == "noise-sweep" ||
      cfg.command == "stability-sweep") {
    // Frames need m >= n; refuse the rank-deficient sampling regime up front.
    if (cfg.command == "phase-transition") {
      if (!cfg.n_list.empty() && !cfg.m_grid.empty()) {
        const Eigen::Index max_n =
            *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
        for (Eigen::Index m : cfg.m_grid)
          if (m < max_n) {
            std::cerr << "m=" << m << " < n=" << max_n
                      << ": frame undefined (need m >= n)\n";
            return 2;
          }
      }
    } else if (cfg.m < cfg.n) {
      std::cerr << "m=" << cfg.m << " < n=" << cfg.n
                << ": frame undefined (need m >= n)\n";
      return 2;
    }
    ExperimentTable table;
    auto manifest = detail::base_manifest(cfg);
    if (cfg.command == "phase-transition") {
      table = phase_transition(cfg.n_list, cfg.r_list, cfg.m_grid, cfg.trials,
                               cfg.solver, cfg.seed, cfg.success_tol,
                               cfg.threads);
      manifest["n_list"] = cfg.n_list;
      manifest["r_list"] = cfg.r_list;
      manifest["m_grid"] = cfg.m_grid;
    } else if (cfg.command == "noise-sweep") {
      table = noise_sweep(cfg.n, cfg.r, cfg.m, cfg.q, cfg.eta_list, cfg.trials,
                          cfg.solver, cfg.seed, cfg.success_tol, cfg.threads);
      manifest["n"] = cfg.n;
      manifest["r"] = cfg.r;
      manifest["m"] = cfg.m;
      manifest["eta_list"] = cfg.eta_list;
      manifest["noise_model"] = lrm::to_string(NoiseModel::ScaledGaussian);
    } else {
      table = stability_sweep(cfg.n, cfg.r, cfg.m, cfg.alpha_list, cfg.trials,
                              cfg.solver, cfg.seed, cfg.success_tol,
                              cfg.threads);
      manifest["n"] = cfg.n;
      manifest["r"] = cfg.r;
      manifest["m"] = cfg.m;
      manifest["alpha_list"] = cfg.alpha_list;
      double worst_ratio = 0.0;
      for (const auto& row : table.rows)
        if (row.tail_term > 0)
          worst_ratio = std::max(worst_ratio, row.abs_err / row.tail_term);
      manifest["max_err_to_tail_ratio"] = worst_ratio;
    }
    write_csv(cfg.output + ".csv", table);
    write_manifest(cfg.output + ".manifest.json", manifest);
    std::cout << "rows=" << table.rows.size()
              << " success_fraction=" << detail::success_fraction(table) << '\n';
    return 0;
  }

  if (cfg.command == "nsp-probe") {
    if (cfg.m < cfg.n && cfg.kind == "tight") {
      std::cerr << "m < n: tight frame undefined\n";
      return 2;
    }
    const MeasurementEnsemble e =
        cfg.kind == "tight" ? tight_frame_ensemble(cfg.m, cfg.n, cfg.seed)
                            : gaussian_ensemble(cfg.m, cfg.n, cfg.seed);
    const NspProbeReport rep = nsp_probe(e, cfg.r, cfg.q, cfg.trials, cfg.seed);
    auto manifest = detail::base_manifest(cfg);
    manifest["n"] = cfg.n;
    manifest["m"] = cfg.m;
    manifest["r"] = cfg.r;
    manifest["kind"] = cfg.kind;
    manifest["worst_ratio"] = rep.worst_ratio;
    manifest["witness_head_frob"] = rep.witness_terms.head_frob;
    manifest["witness_tail_nuclear"] = rep.witness_terms.tail_nuclear;
    manifest["witness_image_norm"] = rep.witness_terms.image_norm;
    write_manifest(cfg.output + ".manifest.json", manifest);
    std::cout << "worst_ratio=" << rep.worst_ratio
              << " head_frob=" << rep.witness_terms.head_frob
              << " tail_nuclear=" << rep.witness_terms.tail_nuclear
              << " image_norm=" << rep.witness_terms.image_norm << '\n';
    return 0;
  }

  std::cerr << "unknown command " << cfg.command << '\n';
  return 2;
}

inline int main(int argc, char** argv) {
  try {
    const RunConfig cfg =
        parse_args(std::vector<std::string>(argv + 1, argv + argc));
    return run(cfg);
  } catch (const UsageError& err) {
    std::cerr << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

}  // namespace lrm::cli
