// Command-line front end: toy event generation, tracking-system assembly,
// classical and quantum-filter solving, scaling sweeps, and fits.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtf/bench.hpp"
#include "qtf/config.hpp"
#include "qtf/errors.hpp"
#include "qtf/filter.hpp"
#include "qtf/hamiltonian.hpp"
#include "qtf/rng.hpp"
#include "qtf/toysim.hpp"

namespace {

using qtf::config::KeyValues;

qtf::toysim::DetectorGeometry geometry_from_config(const KeyValues& kv) {
  const std::string layer_z = kv.get_string("layer_z", "");
  qtf::toysim::DetectorGeometry geometry;
  if (!layer_z.empty()) {
    std::istringstream in(layer_z);
    std::string token;
    while (std::getline(in, token, ',')) geometry.layer_z.push_back(std::stod(token));
    geometry.transverse_halfwidth = kv.get_double("halfwidth", 50.0);
    geometry.validate();
    return geometry;
  }
  return qtf::toysim::DetectorGeometry::uniform(
      static_cast<int>(kv.get_int("layers", 5)), kv.get_double("layer_pitch", 20.0),
      kv.get_double("first_layer_z", 20.0), kv.get_double("halfwidth", 50.0));
}

qtf::toysim::GenConfig gen_from_config(const KeyValues& kv) {
  qtf::toysim::GenConfig gen;
  gen.n_vertices = static_cast<int>(kv.get_int("vertices", 1));
  gen.tracks_per_vertex = static_cast<int>(kv.get_int("tracks", 1));
  gen.sigma_meas = kv.get_double("sigma_meas", 0.0);
  gen.sigma_scatt_coeff = kv.get_double("sigma_scatt", 0.0);
  gen.momentum_range = {kv.get_double("momentum_min", 1.0),
                        kv.get_double("momentum_max", 5.0)};
  gen.ghost_rate = kv.get_double("ghost_rate", 0.0);
  gen.dropout_rate = kv.get_double("dropout_rate", 0.0);
  gen.seed = kv.get_uint("seed", 0);
  gen.z0 = kv.get_double("z0", 0.0);
  gen.z0_window = kv.get_double("z0_window", 0.0);
  gen.slope_max = kv.get_double("slope_max", 0.3);
  return gen;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qtf::ValidationError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw qtf::ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out.good()) throw qtf::ValidationError("write failed: " + path);
}

qtf::toysim::Event load_event(const std::string& path, int index) {
  std::ifstream in(path);
  if (!in) throw qtf::ValidationError("cannot open " + path);
  const auto events = qtf::toysim::read_events(in);
  if (index < 0 || index >= static_cast<int>(events.size()))
    throw qtf::ValidationError("event index out of range (file has " +
                               std::to_string(events.size()) + " events)");
  return events[static_cast<std::size_t>(index)];
}

int run(int argc, char** argv) {
  CLI::App app{"toy tracking lab: spectral-filter track finding on a simulated pixel detector"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file");

  // generate
  auto* generate = app.add_subcommand("generate", "generate toy events (ndjson)");
  std::string gen_out = "events.ndjson";
  int gen_events = 1;
  std::optional<int> gen_tracks, gen_layers, gen_vertices;
  std::optional<double> gen_sigma_meas, gen_sigma_scatt, gen_ghost, gen_dropout;
  std::optional<std::uint64_t> gen_seed;
  generate->add_option("--out", gen_out, "output path");
  generate->add_option("--events", gen_events, "number of events");
  generate->add_option("--tracks", gen_tracks, "tracks per vertex");
  generate->add_option("--layers", gen_layers, "detector layers");
  generate->add_option("--vertices", gen_vertices, "collision vertices");
  generate->add_option("--sigma-meas", gen_sigma_meas, "hit resolution (mm)");
  generate->add_option("--sigma-scatt", gen_sigma_scatt, "scattering coefficient (rad*GeV)");
  generate->add_option("--ghost-rate", gen_ghost, "ghost probability per layer");
  generate->add_option("--dropout-rate", gen_dropout, "hit dropout probability");
  generate->add_option("--seed", gen_seed, "master seed");

  // build
  auto* build = app.add_subcommand("build", "build a tracking system from an event");
  std::string build_in = "events.ndjson", build_out = "system.json";
  int build_index = 0;
  std::optional<double> build_alpha, build_beta, build_epsilon;
  build->add_option("--in", build_in, "events ndjson");
  build->add_option("--index", build_index, "event index");
  build->add_option("--out", build_out, "system JSON output");
  build->add_option("--alpha", build_alpha, "quadratic weight (default 2.0)");
  build->add_option("--beta", build_beta, "gap weight (default 1.0)");
  build->add_option("--epsilon", build_epsilon, "angular tolerance (default 1e-6)");

  // solve
  auto* solve = app.add_subcommand("solve", "classical solve of A x = 1");
  std::string solve_in = "system.json", solve_out = "solution.json";
  std::optional<double> solve_threshold;
  solve->add_option("--system", solve_in, "system JSON");
  solve->add_option("--out", solve_out, "solution JSON output");
  solve->add_option("--threshold", solve_threshold,
                    "accept x above this value (default 1/(alpha+beta) + 1e-9)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run the quantum filter");
  std::string sim_in = "system.json", sim_out = "result.json", sim_mode = "exact";
  std::int64_t sim_shots = 100000;
  std::uint64_t sim_seed = 1;
  double sim_p1 = 0, sim_p2 = 0, sim_pro = 0, sim_tau = 0.25;
  int sim_qubit_cap = 24;
  simulate->add_option("--system", sim_in, "system JSON");
  simulate->add_option("--out", sim_out, "result JSON output");
  simulate->add_option("--mode", sim_mode, "exact | sampled | noisy");
  simulate->add_option("--shots", sim_shots, "shot budget (sampled/noisy)");
  simulate->add_option("--seed", sim_seed, "sampling seed");
  simulate->add_option("--p1", sim_p1, "1q gate error probability");
  simulate->add_option("--p2", sim_p2, "2q gate error probability");
  simulate->add_option("--pro", sim_pro, "readout flip probability");
  simulate->add_option("--tau", sim_tau, "relative acceptance threshold");
  simulate->add_option("--qubit-cap", sim_qubit_cap, "statevector qubit ceiling");

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "sweep a (m, l) grid");
  std::string bench_grid = "2x3,4x3,8x3", bench_mode = "count_only",
              bench_out = "sweep";
  qtf::bench::SweepConfig sweep_config;
  benchmark->add_option("--grid", bench_grid, "comma list of <m>x<l> points");
  benchmark->add_option("--mode", bench_mode, "count_only | exact | sampled");
  benchmark->add_option("--out", bench_out, "output prefix (.csv/.json)");
  benchmark->add_option("--seed", sweep_config.seed, "sweep seed");
  benchmark->add_option("--workers", sweep_config.workers, "worker threads (0 = auto)");
  benchmark->add_option("--epsilon", sweep_config.epsilon, "angular tolerance");
  benchmark->add_option("--shots", sweep_config.shots, "shots for sampled mode");
  benchmark->add_option("--qubit-cap", sweep_config.qubit_cap, "exact-mode qubit ceiling");
  benchmark->add_flag("--timing", sweep_config.timing,
                      "record wall-clock runtime_ms (breaks byte-level reproducibility)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a scaling law to sweep records");
  std::string fit_in = "sweep.csv", fit_out = "fit.json", fit_model = "power",
              fit_y = "p_succ";
  std::optional<int> fit_layers;
  fit->add_option("--in", fit_in, "sweep CSV");
  fit->add_option("--out", fit_out, "fit JSON output");
  fit->add_option("--model", fit_model, "power | gate");
  fit->add_option("--y", fit_y,
                  "column: p_succ | two_q_all_to_all | two_q_linear_chain");
  fit->add_option("--layers", fit_layers, "restrict to records with this l");

  // report
  auto* report = app.add_subcommand("report", "bundle records and fits into a report");
  std::string report_records = "sweep.csv", report_out = "report";
  std::vector<std::string> report_fits;
  std::uint64_t report_seed = 1;
  report->add_option("--records", report_records, "sweep CSV");
  report->add_option("--fits", report_fits, "fit JSON files");
  report->add_option("--out", report_out, "output prefix (.csv/.json)");
  report->add_option("--seed", report_seed, "seed recorded in metadata");

  CLI11_PARSE(app, argc, argv);

  KeyValues kv;
  if (!config_path.empty()) kv = KeyValues::load(config_path);

  if (generate->parsed()) {
    auto geometry = geometry_from_config(kv);
    auto gen = gen_from_config(kv);
    if (gen_layers)
      geometry = qtf::toysim::DetectorGeometry::uniform(
          *gen_layers, kv.get_double("layer_pitch", 20.0),
          kv.get_double("first_layer_z", 20.0), kv.get_double("halfwidth", 50.0));
    if (gen_tracks) gen.tracks_per_vertex = *gen_tracks;
    if (gen_vertices) gen.n_vertices = *gen_vertices;
    if (gen_sigma_meas) gen.sigma_meas = *gen_sigma_meas;
    if (gen_sigma_scatt) gen.sigma_scatt_coeff = *gen_sigma_scatt;
    if (gen_ghost) gen.ghost_rate = *gen_ghost;
    if (gen_dropout) gen.dropout_rate = *gen_dropout;
    if (gen_seed) gen.seed = *gen_seed;
    std::vector<qtf::toysim::Event> events;
    events.reserve(static_cast<std::size_t>(gen_events));
    for (int i = 0; i < gen_events; ++i) {
      auto per_event = gen;
      per_event.seed = qtf::rng::derive(gen.seed, 0xe7e7, static_cast<std::uint64_t>(i));
      events.push_back(qtf::toysim::generate_event(per_event, geometry));
    }
    std::ofstream out(gen_out);
    if (!out) throw qtf::ValidationError("cannot write " + gen_out);
    qtf::toysim::write_events(events, out);
    std::cout << "wrote " << events.size() << " event(s) to " << gen_out << "\n";
    return 0;
  }

  if (build->parsed()) {
    const auto event = load_event(build_in, build_index);
    const double alpha = build_alpha.value_or(kv.get_double("alpha", 2.0));
    const double beta = build_beta.value_or(kv.get_double("beta", 1.0));
    const double epsilon = build_epsilon.value_or(kv.get_double("epsilon", 1e-6));
    auto segments = qtf::hamiltonian::build_candidate_segments(event);
    auto couplings = qtf::hamiltonian::build_couplings(segments, epsilon);
    const auto system = qtf::hamiltonian::assemble_system(
        std::move(segments), std::move(couplings), alpha, beta, epsilon);
    write_json_file(system, build_out);
    std::cout << "system N=" << system.N << " k=" << system.couplings.size()
              << " written to " << build_out << "\n";
    return 0;
  }

  if (solve->parsed()) {
    const auto system =
        read_json_file(solve_in).get<qtf::hamiltonian::TrackingSystem>();
    const auto x = qtf::hamiltonian::solve_classical(system);
    const double threshold =
        solve_threshold.value_or(1.0 / system.diag_c() + 1e-9);
    const auto accepted = qtf::hamiltonian::select_by_threshold(x, threshold);
    nlohmann::json j;
    j["x"] = std::vector<double>(x.data(), x.data() + x.size());
    j["threshold"] = threshold;
    j["accepted"] = accepted;
    write_json_file(j, solve_out);
    std::cout << "solved N=" << system.N << ", accepted " << accepted.size()
              << " segment(s)\n";
    return 0;
  }

  if (simulate->parsed()) {
    const auto system =
        read_json_file(sim_in).get<qtf::hamiltonian::TrackingSystem>();
    auto fc = qtf::filter::FilterConfig::for_system(system);
    fc.selection_tau = sim_tau;
    fc.shots = sim_shots;
    fc.qubit_cap = sim_qubit_cap;
    qtf::filter::FilterResult result;
    if (sim_mode == "exact") {
      result = qtf::filter::run_exact_filter(system, fc);
    } else if (sim_mode == "sampled") {
      result = qtf::filter::run_sampled_filter(system, fc, std::nullopt, sim_seed);
    } else if (sim_mode == "noisy") {
      qtf::qsim::NoiseParams noise{sim_p1, sim_p2, sim_pro};
      result = qtf::filter::run_sampled_filter(system, fc, noise, sim_seed);
    } else {
      throw qtf::ValidationError("unknown mode: " + sim_mode);
    }
    write_json_file(result, sim_out);
    std::cout << "p_succ=" << result.p_succ << " accepted="
              << result.accepted_segments.size() << " -> " << sim_out << "\n";
    return 0;
  }

  if (benchmark->parsed()) {
    const auto grid = qtf::bench::parse_grid(bench_grid);
    const auto mode = qtf::bench::sweep_mode_from_string(bench_mode);
    const auto records = qtf::bench::run_sweep(grid, mode, sweep_config);
    qtf::bench::export_report(records, {}, bench_out, sweep_config);
    std::cout << "swept " << records.size() << " point(s) -> " << bench_out
              << ".csv\n";
    return 0;
  }

  if (fit->parsed()) {
    std::ifstream in(fit_in);
    if (!in) throw qtf::ValidationError("cannot open " + fit_in);
    const auto records = qtf::bench::read_csv(in);
    std::vector<std::pair<double, double>> points;
    for (const auto& r : records) {
      if (r.failed) continue;
      if (fit_layers && r.l != *fit_layers) continue;
      double y = 0;
      if (fit_y == "p_succ") y = r.p_succ;
      else if (fit_y == "two_q_all_to_all") y = static_cast<double>(r.two_q_all_to_all);
      else if (fit_y == "two_q_linear_chain") y = static_cast<double>(r.two_q_linear_chain);
      else throw qtf::ValidationError("unknown y column: " + fit_y);
      if (!std::isfinite(y)) continue;
      points.emplace_back(static_cast<double>(r.N), y);
    }
    const auto model = fit_model == "gate" ? qtf::fitting::FitModel::gate
                      : fit_model == "power" ? qtf::fitting::FitModel::power
                      : throw qtf::ValidationError("unknown model: " + fit_model);
    const auto result = qtf::fitting::fit_power_law(points, model);
    nlohmann::json j = result;
    j["y"] = fit_y;
    j["n_points"] = points.size();
    write_json_file(j, fit_out);
    if (result.ill_conditioned)
      std::cerr << "warning: fit is ill-conditioned\n";
    std::cout << "fit b=" << result.b << " r2=" << result.r_squared << " -> "
              << fit_out << "\n";
    return 0;
  }

  if (report->parsed()) {
    std::ifstream in(report_records);
    if (!in) throw qtf::ValidationError("cannot open " + report_records);
    const auto records = qtf::bench::read_csv(in);
    std::vector<qtf::fitting::FitResult> fits;
    for (const auto& path : report_fits)
      fits.push_back(read_json_file(path).get<qtf::fitting::FitResult>());
    qtf::bench::SweepConfig cfg;
    cfg.seed = report_seed;
    qtf::bench::export_report(records, fits, report_out, cfg);
    std::cout << "report with " << records.size() << " record(s) and "
              << fits.size() << " fit(s) -> " << report_out << ".{csv,json}\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qtf::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const qtf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
