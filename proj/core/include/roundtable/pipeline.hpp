#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "roundtable/alignment.hpp"
#include "roundtable/attention.hpp"
#include "roundtable/battery.hpp"
#include "roundtable/bundle_io.hpp"
#include "roundtable/face_model.hpp"
#include "roundtable/head_pose.hpp"
#include "roundtable/report.hpp"
#include "roundtable/simulator.hpp"

namespace roundtable {

namespace fs = std::filesystem;

/// Environment variable naming a JSON config file applied under the flags.
inline constexpr const char* kConfigEnvVar = "ROUNDTABLE_CONFIG";

struct RunConfig {
  AttentionConfig attention;
  PoseOptions pose;
  BatteryOptions stats;
  std::optional<double> fps_override;
  std::optional<fs::path> face_model_path;
  /// Worker threads for per-session stages; 0 = hardware concurrency.
  int jobs = 0;

  /// alpha in (0, 1), horizontal fraction in (0, 0.5), positive gates.
  void validate() const;
  /// Effective settings as key/value text, embedded in reports.
  std::vector<std::pair<std::string, std::string>> describe() const;
  FaceModel3D face_model() const;
  io::LoadOptions load_options() const;
};

/// Overlays keys of a JSON config document onto `base`. Recognized keys:
/// reading_angle_deg, horizontal_fraction, gate_reference
/// ("field_bottom" | "horizon"), rmse_gate_px, smoothing_window, paired,
/// alpha, exclude_outliers, fps_override, face_model, jobs.
RunConfig apply_config_json(RunConfig base, std::string_view json_text, const std::string& source);

struct ManifestEntry {
  int group_id = 0;
  Condition condition = Condition::kNoCoordination;
  std::optional<fs::path> bundle;    // absolute
  std::optional<fs::path> scenario;  // absolute
};

struct Manifest {
  std::vector<ManifestEntry> sessions;
  std::vector<GroupInfo> groups;

  std::set<int> excluded_groups() const;
};

/// Paths inside the manifest are resolved against its directory.
Manifest load_manifest(const fs::path& path);

/// File names of the per-session intermediates.
inline constexpr std::string_view kPosesFile = "poses.csv";
inline constexpr std::string_view kAttentionFile = "attention.csv";
inline constexpr std::string_view kMatrixFile = "attention_matrix.csv";
inline constexpr std::string_view kSessionMetricsFile = "session_metrics.json";
inline constexpr std::string_view kMetricsFile = "metrics.csv";
inline constexpr std::string_view kGroundTruthFile = "ground_truth.csv";

/// load_session plus corrections.txt, when the bundle has one.
SessionData load_bundle(const fs::path& bundle_dir, const io::LoadOptions& options);

// Stages. Each reads its inputs from disk and writes its outputs atomically.
// Stage-wise runs equal the chained pipeline byte for byte.

/// Scenario -> bundle directory, with ground_truth.csv inside it.
void stage_simulate(const fs::path& scenario_file, const fs::path& bundle_dir);
void stage_pose(const fs::path& bundle_dir, const fs::path& poses_csv, const RunConfig& config);
void stage_attention(const fs::path& bundle_dir, const fs::path& poses_csv,
                     const fs::path& attention_csv, const RunConfig& config);
/// Writes attention_matrix.csv and session_metrics.json into `out_dir`.
void stage_align(const fs::path& bundle_dir, const fs::path& attention_csv, const fs::path& out_dir,
                 const RunConfig& config);
void stage_metrics(const std::vector<fs::path>& session_metrics_files, const fs::path& metrics_csv);
/// stats.json and stats.txt into `out_dir`.
BatteryResult stage_stats(const fs::path& metrics_csv, const Manifest* manifest,
                          const fs::path& out_dir, const RunConfig& config);
void stage_report(const std::vector<fs::path>& session_metrics_files, const fs::path& metrics_csv,
                  const Manifest* manifest, const fs::path& report_dir, const RunConfig& config);

std::string format_ground_truth(const GroundTruth& truth, const SeatingLayout& layout);

/// Runs every stage over a manifest:
///   out/sessions/<tag>/{bundle/, poses.csv, attention.csv, attention_matrix.csv,
///                       session_metrics.json}
///   out/metrics.csv
///   out/report/...
/// Sessions run on a bounded worker pool; the first failure (in manifest
/// order) is rethrown after all workers stop.
void run_pipeline(const fs::path& manifest_path, const fs::path& out_dir, const RunConfig& config);

/// Runs `fn(i)` for i in [0, n) on at most `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace roundtable
