#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtf/fitting.hpp"
#include "qtf/noise.hpp"

namespace qtf::bench {

enum class SweepMode { count_only, exact, sampled };

SweepMode sweep_mode_from_string(const std::string& name);
std::string to_string(SweepMode mode);

struct SweepPoint {
  int m = 1;
  int l = 3;
};

/// Per-point settings for sweep event generation and execution. epsilon
/// defaults to 1e-12 here: noiseless straight tracks are collinear to
/// rounding, and a tight tolerance keeps accidental fake couplings out of the
/// scaling columns.
struct SweepConfig {
  double alpha = 2.0;
  double beta = 1.0;
  double epsilon = 1e-12;
  double selection_tau = 0.25;
  std::int64_t shots = 100000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  int qubit_cap = 24;
  double layer_pitch = 20.0;
  double first_layer_z = 20.0;
  double slope_max = 0.3;
  bool timing = false;  // wall-clock runtime_ms breaks byte-reproducibility
};

struct SweepRecord {
  int m = 0;
  int l = 0;
  std::int64_t N = 0;
  std::int64_t k = 0;
  std::int64_t M = 0;
  std::int64_t two_q_all_to_all = 0;
  std::int64_t two_q_linear_chain = 0;
  double p_succ = 0;
  std::int64_t runtime_ms = 0;
  bool failed = false;
  std::string error;
};

/// One record per grid point; execution parallel over a worker pool, output
/// sorted by (l, m) regardless of completion order. Per-point failures are
/// recorded and the sweep continues. When `stream` is given, rows are
/// appended in order as soon as they are final.
std::vector<SweepRecord> run_sweep(const std::vector<SweepPoint>& grid,
                                   SweepMode mode, const SweepConfig& config,
                                   std::ostream* stream = nullptr);

extern const char* kCsvHeader;

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out);
std::vector<SweepRecord> read_csv(std::istream& in);
std::string format_record(const SweepRecord& record);

/// FNV-1a over the canonical config printout; changes whenever any field does.
std::uint64_t config_hash(const SweepConfig& config);

/// Writes <prefix>.csv (records) and <prefix>.json (fits plus metadata).
void export_report(const std::vector<SweepRecord>& records,
                   const std::vector<fitting::FitResult>& fits,
                   const std::string& prefix, const SweepConfig& config);

std::vector<SweepPoint> parse_grid(const std::string& text);

}  // namespace qtf::bench
