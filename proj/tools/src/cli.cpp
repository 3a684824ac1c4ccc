#include "roundtable/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/errors.hpp"
#include "roundtable/pipeline.hpp"

namespace roundtable {

namespace {

struct Flags {
  std::optional<std::string> config_file;
  std::optional<double> reading_angle_deg;
  std::optional<double> horizontal_fraction;
  std::optional<std::string> gate_reference;
  std::optional<double> rmse_gate_px;
  std::optional<int> smoothing_window;
  std::optional<std::string> paired;
  std::optional<double> alpha;
  std::optional<bool> exclude_outliers;
  std::optional<double> fps_override;
  std::optional<std::string> face_model;
  std::optional<int> jobs;
};

void add_config_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON config file (overrides $ROUNDTABLE_CONFIG)");
  sub->add_option("--reading-angle-deg", f.reading_angle_deg, "Reading gate threshold, degrees");
  sub->add_option("--horizontal-fraction", f.horizontal_fraction,
                  "Boundary band as a fraction of the angular gap");
  sub->add_option("--gate-reference", f.gate_reference, "Reading gate reference")
      ->check(CLI::IsMember({"field_bottom", "horizon"}));
  sub->add_option("--rmse-gate-px", f.rmse_gate_px, "Pose reprojection RMSE gate, pixels");
  sub->add_option("--smoothing-window", f.smoothing_window, "Trailing pose smoothing window, frames");
  sub->add_option("--paired", f.paired, "Primary t-test mode")
      ->check(CLI::IsMember({"no", "yes", "both"}));
  sub->add_option("--alpha", f.alpha, "Significance level");
  sub->add_option("--exclude-outliers", f.exclude_outliers, "Exclude IQR outlier groups (true|false)");
  sub->add_option("--fps-override", f.fps_override, "Replace the landmark file frame rate");
  sub->add_option("--face-model", f.face_model, "3D face model JSON");
  sub->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
}

RunConfig resolve_config(const Flags& f) {
  RunConfig c;
  const char* env = std::getenv(kConfigEnvVar);
  if (env != nullptr && *env != '\0') {
    c = apply_config_json(c, io::read_text_file(env), env);
  }
  if (f.config_file) c = apply_config_json(c, io::read_text_file(*f.config_file), *f.config_file);
  if (f.reading_angle_deg) c.attention.reading_angle_deg = *f.reading_angle_deg;
  if (f.horizontal_fraction) c.attention.horizontal_fraction = *f.horizontal_fraction;
  if (f.gate_reference) {
    c.attention.gate_reference =
        *f.gate_reference == "horizon" ? GateReference::kHorizon : GateReference::kFieldBottom;
  }
  if (f.rmse_gate_px) c.pose.rmse_gate_px = *f.rmse_gate_px;
  if (f.smoothing_window) c.pose.smoothing_window = *f.smoothing_window;
  if (f.paired) c.stats.paired = paired_mode_from_string(*f.paired);
  if (f.alpha) c.stats.alpha = *f.alpha;
  if (f.exclude_outliers) c.stats.exclude_outliers = *f.exclude_outliers;
  if (f.fps_override) c.fps_override = *f.fps_override;
  if (f.face_model) c.face_model_path = fs::path(*f.face_model);
  if (f.jobs) c.jobs = *f.jobs;
  c.validate();
  return c;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

void report_error(std::ostream& err, const std::string& subcommand, std::string_view kind,
                  const std::string& message, const SchemaError* schema = nullptr) {
  nlohmann::ordered_json j;
  j["format"] = "roundtable-error/1";
  j["subcommand"] = subcommand;
  j["kind"] = kind;
  j["message"] = message;
  if (schema != nullptr) {
    j["file"] = schema->file();
    j["line"] = schema->line();
  }
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention and speaking-time analytics for four-person table sessions", "roundtable"};
  app.require_subcommand(1);
  Flags flags;

  std::string bundle, poses, attention, out_path, metrics, manifest, scenario;
  std::vector<std::string> session_files;
  std::optional<std::uint64_t> random_seed;
  RandomScenarioOptions random;
  std::string random_condition = "A";

  auto* pose = app.add_subcommand("pose", "Landmarks -> per-frame head poses");
  pose->add_option("--bundle", bundle, "Session bundle directory")->required();
  pose->add_option("--out", out_path, "Pose dump (CSV)")->required();

  auto* att = app.add_subcommand("attention", "Head poses -> per-frame attention targets");
  att->add_option("--bundle", bundle, "Session bundle directory")->required();
  att->add_option("--poses", poses, "Pose dump from `pose`")->required();
  att->add_option("--out", out_path, "Attention dump (CSV)")->required();

  auto* align = app.add_subcommand("align", "Attention + diarization -> session metrics");
  align->add_option("--bundle", bundle, "Session bundle directory")->required();
  align->add_option("--attention", attention, "Attention dump from `attention`")->required();
  align->add_option("--out", out_path, "Output directory")->required();

  auto* met = app.add_subcommand("metrics", "Session metrics -> per-group metrics table");
  met->add_option("sessions", session_files, "session_metrics.json files")->required();
  met->add_option("--out", out_path, "Metrics table (CSV)")->required();

  auto* st = app.add_subcommand("stats", "Metrics table -> hypothesis test battery");
  st->add_option("--metrics", metrics, "Metrics table from `metrics`")->required();
  st->add_option("--manifest", manifest, "Manifest with the group registry");
  st->add_option("--out", out_path, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Session metrics + metrics table -> figures and tables");
  rep->add_option("sessions", session_files, "session_metrics.json files")->required();
  rep->add_option("--metrics", metrics, "Metrics table from `metrics`")->required();
  rep->add_option("--manifest", manifest, "Manifest with the group registry");
  rep->add_option("--out", out_path, "Report directory")->required();

  auto* sim = app.add_subcommand("simulate", "Scenario -> synthetic bundle with ground truth");
  auto* sc_opt = sim->add_option("--scenario", scenario, "Scenario file");
  auto* seed_opt = sim->add_option("--random-seed", random_seed, "Draw a random scenario instead");
  sc_opt->excludes(seed_opt);
  sim->add_option("--group", random.group_id, "Group id of the random scenario");
  sim->add_option("--condition", random_condition, "Condition of the random scenario")
      ->check(CLI::IsMember({"A", "B"}));
  sim->add_option("--duration-s", random.duration_s, "Duration of the random scenario");
  sim->add_option("--noise-px", random.noise_px, "Landmark jitter of the random scenario");
  sim->add_option("--out", out_path, "Bundle directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "Every stage over a manifest of sessions");
  pipe->add_option("--manifest", manifest, "Manifest file")->required();
  pipe->add_option("--out", out_path, "Output directory")->required();

  for (auto* sub : {pose, att, align, st, rep, sim, pipe}) add_config_flags(sub, flags);

  std::string subcommand;
  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    report_error(err, argv[1], "usage", fmt::format("unknown subcommand '{}'", argv[1]));
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    for (const auto* sub : app.get_subcommands()) subcommand = sub->get_name();
    report_error(err, subcommand, "usage", e.what());
    err << app.help();
    return kExitUsage;
  }
  subcommand = app.get_subcommands().front()->get_name();

  try {
    const RunConfig config = resolve_config(flags);
    std::optional<Manifest> mf;
    if (!manifest.empty()) mf = load_manifest(manifest);
    const Manifest* mfp = mf ? &*mf : nullptr;

    if (subcommand == "pose") {
      stage_pose(bundle, out_path, config);
    } else if (subcommand == "attention") {
      stage_attention(bundle, poses, out_path, config);
    } else if (subcommand == "align") {
      stage_align(bundle, attention, out_path, config);
    } else if (subcommand == "metrics") {
      stage_metrics(to_paths(session_files), out_path);
    } else if (subcommand == "stats") {
      out << format_stats_text(stage_stats(metrics, mfp, out_path, config));
    } else if (subcommand == "report") {
      stage_report(to_paths(session_files), metrics, mfp, out_path, config);
    } else if (subcommand == "simulate") {
      if (random_seed) {
        random.condition = condition_from_string(random_condition);
        const fs::path file = fs::path(out_path) / "scenario.json";
        fs::create_directories(out_path);
        io::write_text_file(file, format_scenario(random_scenario(*random_seed, random)));
        stage_simulate(file, out_path);
      } else if (!scenario.empty()) {
        stage_simulate(scenario, out_path);
      } else {
        report_error(err, subcommand, "usage", "one of --scenario or --random-seed is required");
        return kExitUsage;
      }
    } else if (subcommand == "pipeline") {
      run_pipeline(manifest, out_path, config);
    }
  } catch (const SchemaError& e) {
    report_error(err, subcommand, "schema", e.what(), &e);
    return kExitFailure;
  } catch (const ValidationError& e) {
    report_error(err, subcommand, "validation", e.what());
    return kExitFailure;
  } catch (const DegenerateError& e) {
    report_error(err, subcommand, "degenerate", e.what());
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    report_error(err, subcommand, "io", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(err, subcommand, "internal", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace roundtable
