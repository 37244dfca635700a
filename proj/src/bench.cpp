#include "qtf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "qtf/errors.hpp"
#include "qtf/filter.hpp"
#include "qtf/parallel.hpp"
#include "qtf/rng.hpp"
#include "qtf/toysim.hpp"

namespace qtf::bench {

SweepMode sweep_mode_from_string(const std::string& name) {
  if (name == "count_only" || name == "count") return SweepMode::count_only;
  if (name == "exact") return SweepMode::exact;
  if (name == "sampled") return SweepMode::sampled;
  throw ValidationError("unknown sweep mode: " + name);
}

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::count_only: return "count_only";
    case SweepMode::exact: return "exact";
    case SweepMode::sampled: return "sampled";
  }
  return "?";
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SweepRecord run_point(const SweepPoint& point, SweepMode mode,
                      const SweepConfig& config) {
  SweepRecord rec;
  rec.m = point.m;
  rec.l = point.l;
  const auto start = std::chrono::steady_clock::now();
  try {
    const double z_max = config.first_layer_z + config.layer_pitch * (point.l - 1);
    const double halfwidth = config.slope_max * z_max * 1.05 + 1.0;
    const auto geometry = toysim::DetectorGeometry::uniform(
        point.l, config.layer_pitch, config.first_layer_z, halfwidth);
    toysim::GenConfig gen;
    gen.tracks_per_vertex = point.m;
    gen.slope_max = config.slope_max;
    gen.seed = rng::derive(config.seed, 0xb31c,
                           (static_cast<std::uint64_t>(point.l) << 32) |
                               static_cast<std::uint64_t>(point.m));
    const auto event = toysim::generate_event(gen, geometry);

    auto segments = hamiltonian::build_candidate_segments(event);
    auto couplings = hamiltonian::build_couplings(segments, config.epsilon);
    const auto system = hamiltonian::assemble_system(
        std::move(segments), std::move(couplings), config.alpha, config.beta,
        config.epsilon);

    rec.N = system.N;
    rec.k = static_cast<std::int64_t>(system.couplings.size());
    std::int64_t truth_matched = 0;
    for (const auto& s : system.segments)
      if (event.truth_segments.count({s.from_hit, s.to_hit})) ++truth_matched;
    rec.M = truth_matched;

    filter::FilterConfig fc = filter::FilterConfig::for_system(system);
    fc.selection_tau = config.selection_tau;
    fc.shots = config.shots;
    fc.qubit_cap = config.qubit_cap;

    const auto circuit = filter::build_filter_circuit(system, fc);
    rec.two_q_all_to_all =
        dss::count_lowered(circuit, dss::Topology::all_to_all).two_q_charged;
    rec.two_q_linear_chain =
        dss::count_lowered(circuit, dss::Topology::linear_chain).two_q_charged;

    switch (mode) {
      case SweepMode::count_only:
        rec.p_succ = std::nan("");
        break;
      case SweepMode::exact:
        rec.p_succ = filter::run_exact_filter(system, fc).p_succ;
        break;
      case SweepMode::sampled: {
        const auto result = filter::run_sampled_filter(
            system, fc, std::nullopt,
            rng::derive(config.seed, 0x54a7,
                        (static_cast<std::uint64_t>(point.l) << 32) |
                            static_cast<std::uint64_t>(point.m)));
        rec.p_succ = result.p_succ;
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.p_succ = std::nan("");
  }
  if (config.timing) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    rec.runtime_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  }
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const std::vector<SweepPoint>& grid,
                                   SweepMode mode, const SweepConfig& config,
                                   std::ostream* stream) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  std::vector<SweepPoint> points = grid;
  std::sort(points.begin(), points.end(),
            [](const SweepPoint& a, const SweepPoint& b) {
              return std::pair(a.l, a.m) < std::pair(b.l, b.m);
            });

  std::vector<SweepRecord> records(points.size());
  std::vector<char> done(points.size(), 0);
  std::mutex stream_mutex;
  std::size_t next_to_stream = 0;
  parallel_for(
      static_cast<std::int64_t>(points.size()),
      [&](std::int64_t i) {
        records[static_cast<std::size_t>(i)] =
            run_point(points[static_cast<std::size_t>(i)], mode, config);
        if (!stream) return;
        std::lock_guard<std::mutex> lock(stream_mutex);
        done[static_cast<std::size_t>(i)] = 1;
        while (next_to_stream < points.size() && done[next_to_stream]) {
          (*stream) << format_record(records[next_to_stream]) << "\n";
          stream->flush();
          ++next_to_stream;
        }
      },
      config.workers);
  return records;
}

const char* kCsvHeader =
    "m,l,N,k,M,two_q_all_to_all,two_q_linear_chain,p_succ,runtime_ms";

std::string format_record(const SweepRecord& r) {
  std::ostringstream out;
  out << r.m << "," << r.l << "," << r.N << "," << r.k << "," << r.M << ","
      << r.two_q_all_to_all << "," << r.two_q_linear_chain << ","
      << format_double(r.p_succ) << "," << r.runtime_ms;
  return out.str();
}

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : records) out << format_record(r) << "\n";
}

std::vector<SweepRecord> read_csv(std::istream& in) {
  std::vector<SweepRecord> records;
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("empty CSV");
  if (line != kCsvHeader)
    throw ValidationError("unexpected CSV header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw ValidationError("bad CSV row: " + line);
    SweepRecord r;
    r.m = std::stoi(cells[0]);
    r.l = std::stoi(cells[1]);
    r.N = std::stoll(cells[2]);
    r.k = std::stoll(cells[3]);
    r.M = std::stoll(cells[4]);
    r.two_q_all_to_all = std::stoll(cells[5]);
    r.two_q_linear_chain = std::stoll(cells[6]);
    r.p_succ = std::stod(cells[7]);
    r.runtime_ms = std::stoll(cells[8]);
    records.push_back(r);
  }
  return records;
}

std::uint64_t config_hash(const SweepConfig& config) {
  std::ostringstream canon;
  canon << "alpha=" << format_double(config.alpha)
        << ";beta=" << format_double(config.beta)
        << ";epsilon=" << format_double(config.epsilon)
        << ";tau=" << format_double(config.selection_tau)
        << ";shots=" << config.shots << ";seed=" << config.seed
        << ";qubit_cap=" << config.qubit_cap
        << ";layer_pitch=" << format_double(config.layer_pitch)
        << ";first_layer_z=" << format_double(config.first_layer_z)
        << ";slope_max=" << format_double(config.slope_max);
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : canon.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void export_report(const std::vector<SweepRecord>& records,
                   const std::vector<fitting::FitResult>& fits,
                   const std::string& prefix, const SweepConfig& config) {
  {
    std::ofstream csv(prefix + ".csv");
    if (!csv) throw ValidationError("cannot write " + prefix + ".csv");
    write_csv(records, csv);
    if (!csv.good()) throw ValidationError("write failed: " + prefix + ".csv");
  }
  nlohmann::json j;
  j["version"] = "0.1.0";
  j["seed"] = config.seed;
  char hash_buf[24];
  std::snprintf(hash_buf, sizeof(hash_buf), "0x%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  j["config_hash"] = hash_buf;
  j["n_records"] = records.size();
  auto fits_json = nlohmann::json::array();
  for (const auto& f : fits) fits_json.push_back(f);
  j["fits"] = fits_json;
  auto failures = nlohmann::json::array();
  for (const auto& r : records)
    if (r.failed)
      failures.push_back({{"m", r.m}, {"l", r.l}, {"error", r.error}});
  j["failures"] = failures;
  std::ofstream out(prefix + ".json");
  if (!out) throw ValidationError("cannot write " + prefix + ".json");
  out << j.dump(2) << "\n";
  if (!out.good()) throw ValidationError("write failed: " + prefix + ".json");
}

std::vector<SweepPoint> parse_grid(const std::string& text) {
  std::vector<SweepPoint> grid;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    const auto x = token.find('x');
    if (x == std::string::npos)
      throw ValidationError("grid token must look like <m>x<l>: " + token);
    SweepPoint p;
    p.m = std::stoi(token.substr(0, x));
    p.l = std::stoi(token.substr(x + 1));
    if (p.m < 1 || p.l < 2)
      throw ValidationError("grid point out of range: " + token);
    grid.push_back(p);
  }
  if (grid.empty()) throw ValidationError("empty grid");
  return grid;
}

}  // namespace qtf::bench
