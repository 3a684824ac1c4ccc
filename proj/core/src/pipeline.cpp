#include "roundtable/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/corrections.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

namespace {

using nlohmann::json;

constexpr std::string_view kManifestFormat = "roundtable-manifest/1";

std::string gate_name(GateReference g) {
  return g == GateReference::kFieldBottom ? "field_bottom" : "horizon";
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw SchemaError(p.string(), 0, "cannot open file");
  return in;
}

std::vector<SessionMetrics> read_session_metrics(const std::vector<fs::path>& files) {
  std::vector<SessionMetrics> out;
  for (const auto& f : files) out.push_back(parse_session_metrics(io::read_text_file(f), f.string()));
  return out;
}

std::vector<MetricsRow> read_metrics_rows(const fs::path& metrics_csv) {
  auto in = open_in(metrics_csv);
  return parse_metrics_csv(in, metrics_csv.string());
}

BatteryResult battery_for(const fs::path& metrics_csv, const Manifest* manifest,
                          const RunConfig& config) {
  const auto rows = read_metrics_rows(metrics_csv);
  BatteryResult r =
      run_battery(rows, manifest ? manifest->excluded_groups() : std::set<int>{}, config.stats);
  r.config = config.describe();
  return r;
}

std::string session_tag(int group_id, Condition c) {
  return fmt::format("group{}_{}", group_id, to_string(c));
}

}  // namespace

void RunConfig::validate() const {
  if (!(stats.alpha > 0.0 && stats.alpha < 1.0)) {
    throw ValidationError(fmt::format("alpha must lie in (0, 1), got {}", stats.alpha));
  }
  if (!(attention.horizontal_fraction > 0.0 && attention.horizontal_fraction < 0.5)) {
    throw ValidationError(fmt::format("horizontal fraction must lie in (0, 0.5), got {}",
                                      attention.horizontal_fraction));
  }
  if (!std::isfinite(attention.reading_angle_deg)) throw ValidationError("reading angle must be finite");
  if (!(pose.rmse_gate_px > 0.0)) throw ValidationError("pose RMSE gate must be positive");
  if (fps_override && !(*fps_override > 0.0)) throw ValidationError("fps override must be positive");
  if (jobs < 0) throw ValidationError("jobs must be non-negative");
}

std::vector<std::pair<std::string, std::string>> RunConfig::describe() const {
  const FaceModel3D model = face_model();
  return {
      {"reading_angle_deg", fmt::format("{}", attention.reading_angle_deg)},
      {"gate_reference", gate_name(attention.gate_reference)},
      {"horizontal_fraction", fmt::format("{}", attention.horizontal_fraction)},
      {"rmse_gate_px", fmt::format("{}", pose.rmse_gate_px)},
      {"smoothing_window", fmt::format("{}", pose.smoothing_window)},
      {"paired", std::string(to_string(stats.paired))},
      {"alpha", fmt::format("{}", stats.alpha)},
      {"exclude_outliers", stats.exclude_outliers ? "true" : "false"},
      {"fps_override", fps_override ? fmt::format("{}", *fps_override) : "none"},
      {"face_model", fmt::format("{} v{}", model.name, model.version)},
  };
}

FaceModel3D RunConfig::face_model() const {
  return face_model_path ? load_face_model(*face_model_path) : FaceModel3D::generic_v1();
}

io::LoadOptions RunConfig::load_options() const {
  io::LoadOptions o;
  o.fps_override = fps_override;
  return o;
}

RunConfig apply_config_json(RunConfig c, std::string_view json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw SchemaError(source, 0, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "reading_angle_deg") {
        c.attention.reading_angle_deg = v.get<double>();
      } else if (key == "horizontal_fraction") {
        c.attention.horizontal_fraction = v.get<double>();
      } else if (key == "gate_reference") {
        const auto s = v.get<std::string>();
        if (s == "field_bottom") {
          c.attention.gate_reference = GateReference::kFieldBottom;
        } else if (s == "horizon") {
          c.attention.gate_reference = GateReference::kHorizon;
        } else {
          throw SchemaError(source, 0, fmt::format("gate_reference '{}' is not field_bottom or horizon", s));
        }
      } else if (key == "rmse_gate_px") {
        c.pose.rmse_gate_px = v.get<double>();
      } else if (key == "smoothing_window") {
        c.pose.smoothing_window = v.get<int>();
      } else if (key == "paired") {
        c.stats.paired = paired_mode_from_string(v.get<std::string>());
      } else if (key == "alpha") {
        c.stats.alpha = v.get<double>();
      } else if (key == "exclude_outliers") {
        c.stats.exclude_outliers = v.get<bool>();
      } else if (key == "fps_override") {
        c.fps_override = v.get<double>();
      } else if (key == "face_model") {
        fs::path p = v.get<std::string>();
        if (p.is_relative()) p = fs::path(source).parent_path() / p;
        c.face_model_path = p;
      } else if (key == "jobs") {
        c.jobs = v.get<int>();
      } else {
        throw SchemaError(source, 0, fmt::format("unknown config key '{}'", key));
      }
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
  return c;
}

std::set<int> Manifest::excluded_groups() const {
  std::set<int> out;
  for (const auto& g : groups) {
    if (g.excluded) out.insert(g.group_id);
  }
  return out;
}

Manifest load_manifest(const fs::path& path) {
  const std::string source = path.string();
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object() || j.value("format", std::string()) != kManifestFormat) {
    throw SchemaError(source, 0, fmt::format("expected format '{}'", kManifestFormat));
  }
  const fs::path base = fs::absolute(path).parent_path();
  Manifest m;
  try {
    for (const auto& s : j.at("sessions")) {
      ManifestEntry e;
      e.group_id = s.at("group_id").get<int>();
      e.condition = condition_from_string(s.at("condition").get<std::string>());
      if (s.contains("bundle")) e.bundle = (base / s["bundle"].get<std::string>()).lexically_normal();
      if (s.contains("scenario")) {
        e.scenario = (base / s["scenario"].get<std::string>()).lexically_normal();
      }
      if (e.bundle.has_value() == e.scenario.has_value()) {
        throw SchemaError(source, 0,
                          fmt::format("session {} must name exactly one of bundle / scenario",
                                      session_tag(e.group_id, e.condition)));
      }
      m.sessions.push_back(std::move(e));
    }
    for (const auto& g : j.value("groups", json::array())) {
      GroupInfo gi;
      gi.group_id = g.at("group_id").get<int>();
      gi.male = g.value("male", 0);
      gi.female = g.value("female", 0);
      gi.outcome_a = g.value("outcome_A", std::string());
      gi.outcome_b = g.value("outcome_B", std::string());
      gi.excluded = g.value("excluded", false);
      m.groups.push_back(std::move(gi));
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
  std::set<std::pair<int, Condition>> seen;
  for (const auto& e : m.sessions) {
    if (!seen.insert({e.group_id, e.condition}).second) {
      throw ValidationError(fmt::format("{}: session {} listed twice", source,
                                        session_tag(e.group_id, e.condition)));
    }
  }
  return m;
}

SessionData load_bundle(const fs::path& bundle_dir, const io::LoadOptions& options) {
  SessionData data = io::load_session(bundle_dir, options);
  const fs::path patch = bundle_dir / io::kCorrectionsFile;
  if (fs::exists(patch)) {
    auto in = open_in(patch);
    const auto corrections = parse_corrections(in, patch.string());
    data.segments = apply_corrections(data.segments, corrections, data.session.layout, &data.warnings);
  }
  return data;
}

std::string format_ground_truth(const GroundTruth& truth, const SeatingLayout& layout) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "frame_idx,observer,target,margin_deg\n");
  for (const auto& f : truth.frames) {
    std::string_view target = "UNFOCUSED";
    if (f.target.kind == AttentionTarget::Kind::kReading) target = "READING";
    if (f.target.is_participant()) target = layout.seats[f.target.seat].id;
    fmt::format_to(std::back_inserter(out), "{},{},{},{:.6f}\n", f.frame_idx,
                   layout.seats[f.observer].id, target, f.margin_deg);
  }
  return fmt::to_string(out);
}

void stage_simulate(const fs::path& scenario_file, const fs::path& bundle_dir) {
  const Scenario sc = parse_scenario(io::read_text_file(scenario_file), scenario_file.string());
  const Synthesis syn = synthesize(sc);
  io::save_session(syn.bundle, bundle_dir);
  io::write_text_file(bundle_dir / kGroundTruthFile,
                      format_ground_truth(syn.truth, sc.session.layout));
}

void stage_pose(const fs::path& bundle_dir, const fs::path& poses_csv, const RunConfig& config) {
  const SessionData data = load_bundle(bundle_dir, config.load_options());
  const auto poses = estimate_session_poses(data, config.face_model(), config.pose);
  io::write_text_file(poses_csv, format_pose_dump(poses, data.session.layout));
}

void stage_attention(const fs::path& bundle_dir, const fs::path& poses_csv,
                     const fs::path& attention_csv, const RunConfig& config) {
  const SessionData data = load_bundle(bundle_dir, config.load_options());
  auto in = open_in(poses_csv);
  const auto poses = parse_pose_dump(in, data.session.layout, poses_csv.string());
  const auto records = classify_session(data.session, poses, config.attention);
  io::write_text_file(attention_csv, format_attention_dump(records, data.session.layout));
}

void stage_align(const fs::path& bundle_dir, const fs::path& attention_csv, const fs::path& out_dir,
                 const RunConfig& config) {
  const SessionData data = load_bundle(bundle_dir, config.load_options());
  auto in = open_in(attention_csv);
  const auto records = parse_attention_dump(in, data.session.layout, attention_csv.string());
  const auto metrics = compute_session_metrics(data.session, records, data.segments);
  fs::create_directories(out_dir);
  io::write_text_file(out_dir / kMatrixFile,
                      format_attention_matrix(metrics.attention, data.session.layout));
  io::write_text_file(out_dir / kSessionMetricsFile, format_session_metrics(metrics));
}

void stage_metrics(const std::vector<fs::path>& files, const fs::path& metrics_csv) {
  std::vector<MetricsRow> rows;
  for (const auto& m : read_session_metrics(files)) rows.push_back(metrics_row(m));
  io::write_text_file(metrics_csv, format_metrics_csv(std::move(rows)));
}

BatteryResult stage_stats(const fs::path& metrics_csv, const Manifest* manifest,
                          const fs::path& out_dir, const RunConfig& config) {
  BatteryResult r = battery_for(metrics_csv, manifest, config);
  fs::create_directories(out_dir);
  io::write_text_file(out_dir / "stats.json", format_stats_json(r));
  io::write_text_file(out_dir / "stats.txt", format_stats_text(r));
  return r;
}

void stage_report(const std::vector<fs::path>& session_metrics_files, const fs::path& metrics_csv,
                  const Manifest* manifest, const fs::path& report_dir, const RunConfig& config) {
  ReportInputs in;
  in.sessions = read_session_metrics(session_metrics_files);
  if (manifest) in.registry = manifest->groups;
  in.stats = battery_for(metrics_csv, manifest, config);
  emit_report(report_dir, in);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void run_pipeline(const fs::path& manifest_path, const fs::path& out_dir, const RunConfig& config) {
  config.validate();
  const Manifest manifest = load_manifest(manifest_path);
  const fs::path sessions_dir = out_dir / "sessions";
  std::vector<fs::path> metric_files(manifest.sessions.size());

  parallel_for(manifest.sessions.size(), config.jobs, [&](std::size_t i) {
    const auto& e = manifest.sessions[i];
    const fs::path dir = sessions_dir / session_tag(e.group_id, e.condition);
    fs::create_directories(dir);
    fs::path bundle = e.bundle ? *e.bundle : dir / "bundle";
    if (e.scenario) stage_simulate(*e.scenario, bundle);
    const SessionData probe = load_bundle(bundle, config.load_options());
    if (probe.session.group_id != e.group_id || probe.session.condition != e.condition) {
      throw ValidationError(fmt::format("{}: bundle describes {}, manifest expects {}", bundle.string(),
                                        probe.session.tag(), session_tag(e.group_id, e.condition)));
    }
    stage_pose(bundle, dir / kPosesFile, config);
    stage_attention(bundle, dir / kPosesFile, dir / kAttentionFile, config);
    stage_align(bundle, dir / kAttentionFile, dir, config);
    metric_files[i] = dir / kSessionMetricsFile;
  });

  const fs::path metrics_csv = out_dir / kMetricsFile;
  stage_metrics(metric_files, metrics_csv);
  stage_report(metric_files, metrics_csv, &manifest, out_dir / "report", config);
}

}  // namespace roundtable
