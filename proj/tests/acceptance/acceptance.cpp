#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "roundtable/alignment.hpp"
#include "roundtable/angles.hpp"
#include "roundtable/attention.hpp"
#include "roundtable/battery.hpp"
#include "roundtable/bundle_io.hpp"
#include "roundtable/cli.hpp"
#include "roundtable/head_pose.hpp"
#include "roundtable/pipeline.hpp"
#include "roundtable/pnp.hpp"
#include "roundtable/report.hpp"
#include "roundtable/rotation.hpp"
#include "roundtable/simulator.hpp"
#include "roundtable/stats.hpp"

namespace fs = std::filesystem;
using namespace roundtable;

namespace {

constexpr int kGeometrySessions = 50;
constexpr double kGeometryDurationS = 60.0;
constexpr double kGeometryFps = 30.0;
constexpr double kJitterPx = 2.0;
constexpr double kBoundaryMarginDeg = 0.1;
constexpr double kEdgeMarginDeg = 5.0;
constexpr double kNoisyAgreementMin = 0.99;
constexpr double kGeometryBudgetS = 60.0;
constexpr int kPoseSamples = 1000;
constexpr double kPoseTolDeg = 0.5;
constexpr double kRoundTripTolRad = 1e-9;
constexpr double kFocusTol = 1e-9;
constexpr double kOracleTol = 1e-6;

const fs::path kSourceDir = ROUNDTABLE_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run_criterion(const std::string& name, const std::function<Outcome()>& body) {
  try {
    report(name, body());
  } catch (const std::exception& e) {
    report(name, {false, fmt::format("exception: {}", e.what())});
  }
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

RandomScenarioOptions geometry_options(double noise_px) {
  RandomScenarioOptions opt;
  opt.fps = kGeometryFps;
  opt.duration_s = kGeometryDurationS;
  opt.noise_px = noise_px;
  return opt;
}

struct GeometryFixture {
  SessionData bundle;
  std::vector<AttentionRecord> records;
};

std::vector<GeometryFixture> geometry_fixtures;

Outcome geometry_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const FaceModel3D model = FaceModel3D::generic_v1();
  std::int64_t clean_total = 0, clean_match = 0, noisy_total = 0, noisy_match = 0;
  for (int i = 0; i < kGeometrySessions; ++i) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
    for (double noise : {0.0, kJitterPx}) {
      const Synthesis syn = synthesize(random_scenario(seed, geometry_options(noise)));
      const auto poses = estimate_session_poses(syn.bundle, model, {});
      const auto recs = classify_session(syn.bundle.session, poses);
      if (recs.size() != syn.truth.frames.size()) {
        return {false, fmt::format("seed {}: {} records for {} truth frames", seed, recs.size(),
                                   syn.truth.frames.size())};
      }
      for (std::size_t k = 0; k < recs.size(); ++k) {
        const FrameTruth& t = syn.truth.frames[k];
        const bool match = recs[k].target == t.target;
        const bool absent = t.target == AttentionTarget::unfocused();
        if (noise == 0.0) {
          if (!absent && t.margin_deg < kBoundaryMarginDeg) continue;
          ++clean_total;
          clean_match += match;
        } else {
          if (absent || t.margin_deg < kEdgeMarginDeg) continue;
          ++noisy_total;
          noisy_match += match;
        }
      }
      geometry_fixtures.push_back({syn.bundle, recs});
    }
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double noisy_rate = static_cast<double>(noisy_match) / static_cast<double>(noisy_total);
  const bool pass = clean_match == clean_total && noisy_rate >= kNoisyAgreementMin && elapsed < kGeometryBudgetS;
  return {pass, fmt::format("zero noise {}/{} non-boundary frames; {} px jitter {}/{} = {:.4f} "
                            "(min {:.2f}) at margin >= {} deg; {:.1f} s (limit {:.0f} s)",
                            clean_match, clean_total, kJitterPx, noisy_match, noisy_total, noisy_rate,
                            kNoisyAgreementMin, kEdgeMarginDeg, elapsed, kGeometryBudgetS)};
}

Outcome pose_recovery() {
  Gen g(2001);
  const FaceModel3D model = FaceModel3D::generic_v1();
  const CameraModel camera;
  double worst_deg = 0.0, worst_rad = 0.0;
  for (int i = 0; i < kPoseSamples; ++i) {
    const EulerDeg truth{g.uniform(-40, 40), g.uniform(-60, 60), g.uniform(-20, 20)};
    const Vec3 t(g.uniform(-100, 100), g.uniform(-100, 100), g.uniform(600, 1400));
    const Mat3 r = euler_to_matrix(truth);
    const HeadPose pose = head_pose_from(solve_pnp(project_model(model, camera, r, t), model, camera));
    worst_deg = std::max({worst_deg, std::abs(pose.pitch_deg - truth.pitch),
                          std::abs(pose.yaw_deg - truth.yaw), std::abs(pose.roll_deg - truth.roll)});

    const EulerDeg back = matrix_to_euler(r);
    worst_rad = std::max({worst_rad, std::abs(deg_to_rad(back.pitch - truth.pitch)),
                          std::abs(deg_to_rad(back.yaw - truth.yaw)),
                          std::abs(deg_to_rad(back.roll - truth.roll))});
    const Vec3 rv = matrix_to_rotation_vec(r);
    worst_rad = std::max(worst_rad, (matrix_to_rotation_vec(rotation_vec_to_matrix(rv)) - rv).norm());
  }
  return {worst_deg <= kPoseTolDeg && worst_rad <= kRoundTripTolRad,
          fmt::format("{} poses, worst Euler error {:.2e} deg (limit {}); worst round trip {:.2e} rad "
                      "(limit {:.0e})",
                      kPoseSamples, worst_deg, kPoseTolDeg, worst_rad, kRoundTripTolRad)};
}

HeadPose pose_of(double pitch, double yaw) {
  HeadPose p;
  p.pitch_deg = pitch;
  p.yaw_deg = yaw;
  return p;
}

Outcome focus_examples() {
  const double r = 1.3;
  const FocusVector head_on = focus_vector(location_vector(0, 0, r), pose_of(0, 0));
  const double e1 = std::max((head_on.v_f - Vec3(-r, 0, 0)).norm(),
                             std::abs(wrap_deg_360(head_on.horiz_angle_deg) - 180.0));
  const FocusVector fold = focus_vector(location_vector(0, 0, 1.0), pose_of(0, 90));
  const double e2 = std::max((fold.v_f - Vec3(1.0, 0, 0)).norm(), std::abs(fold.horiz_angle_deg));
  const LocationVector loc = location_vector(37, 14, 0.9);
  const FocusVector level = focus_vector(loc, pose_of(14, 23));
  const double e3 = std::abs(level.v_f.z() + loc.v.z());
  const double worst = std::max({e1, e2, e3});
  return {worst <= kFocusTol,
          fmt::format("head-on {:.1e}, yaw 90 fold-back {:.1e}, pitch = b {:.1e} (limit {:.0e})", e1, e2, e3,
                      kFocusTol)};
}

std::vector<MetricsRow> random_rows(Gen& g, int groups) {
  std::vector<MetricsRow> rows;
  for (int id = 1; id <= groups; ++id) {
    for (Condition c : {Condition::kNoCoordination, Condition::kPlanningPoker}) {
      MetricsRow r;
      r.group_id = id;
      r.condition = c;
      r.tst = g.uniform(300, 700);
      r.ast = r.tst / 4.0;
      r.stsd = g.uniform(20, 80);
      r.tat = g.uniform(100, 400);
      r.aat = r.tat / 4.0;
      r.atsd = g.uniform(10, 60);
      rows.push_back(r);
    }
  }
  return rows;
}

const StatReport& report_for(const BatteryResult& r, Metric m) {
  return *std::find_if(r.reports.begin(), r.reports.end(), [&](const StatReport& s) { return s.metric == m; });
}

std::vector<MetricsRow> group10_fixture() {
  Gen g(2004);
  auto rows = random_rows(g, 12);
  for (auto& r : rows) {
    if (r.group_id == 10 && r.condition == Condition::kNoCoordination) r.stsd = 400.0;
  }
  return rows;
}

std::vector<MetricsRow> pipeline_rows() {
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < geometry_fixtures.size(); i += 2) {
    const auto& f = geometry_fixtures[i];
    SessionMetrics m = compute_session_metrics(f.bundle.session, f.records, f.bundle.segments);
    MetricsRow row = metrics_row(m);
    row.group_id = static_cast<int>(rows.size()) / 2 + 1;
    row.condition = rows.size() % 2 == 0 ? Condition::kNoCoordination : Condition::kPlanningPoker;
    rows.push_back(row);
  }
  return rows;
}

Outcome scale_invariance() {
  Gen g(2003);
  std::vector<std::vector<MetricsRow>> datasets;
  for (int i = 0; i < 200; ++i) datasets.push_back(random_rows(g, g.integer(3, 20)));
  datasets.push_back(group10_fixture());
  datasets.push_back(pipeline_rows());
  int compared = 0;
  for (const auto& rows : datasets) {
    for (PairedMode mode : {PairedMode::kNo, PairedMode::kYes}) {
      BatteryOptions opt;
      opt.paired = mode;
      const BatteryResult res = run_battery(rows, {}, opt);
      for (auto [total, average] : {std::pair{Metric::kTST, Metric::kAST}, std::pair{Metric::kTAT, Metric::kAAT}}) {
        const auto pt = report_for(res, total).t_p(mode);
        const auto pa = report_for(res, average).t_p(mode);
        if (!pt || !pa || *pt != *pa) {
          return {false, fmt::format("{} vs {} differ on dataset {} (paired {}): {} vs {}", to_string(total),
                                     to_string(average), &rows - datasets.data(), to_string(mode),
                                     pt ? fmt::format("{}", *pt) : "none", pa ? fmt::format("{}", *pa) : "none")};
        }
        ++compared;
      }
    }
  }
  return {true, fmt::format("{} total/average p-value pairs bitwise equal over {} datasets", compared,
                            datasets.size())};
}

Outcome stats_oracle() {
  std::ifstream in(kSourceDir / "tests" / "data" / "stats_battery.json");
  const auto doc = nlohmann::json::parse(in);
  double worst = 0.0;
  std::string worst_at;
  int cases = 0;
  auto check = [&](const TestResult& got, const nlohmann::json& ref, const std::string& what) {
    for (double err : {std::abs(got.statistic - ref[0].get<double>()), std::abs(got.p - ref[1].get<double>())}) {
      if (err > worst) {
        worst = err;
        worst_at = what;
      }
    }
  };
  for (const auto& c : doc["cases"]) {
    ++cases;
    const auto a = c["a"].get<std::vector<double>>();
    const auto b = c["b"].get<std::vector<double>>();
    const std::string name = c["name"];
    for (const char* ref : {"scipy", "mpmath"}) {
      const auto& r = c[ref];
      const std::string tag = name + "/" + ref;
      check(shapiro_wilk(a), r["shapiro_A"], tag + " shapiro A");
      check(shapiro_wilk(b), r["shapiro_B"], tag + " shapiro B");
      check(levene(a, b), r["levene"], tag + " levene");
      check(t_test(a, b), r["t_ind"], tag + " t");
      if (r.contains("t_paired")) check(t_test(a, b, true), r["t_paired"], tag + " paired t");
      const double d_err = std::abs(cohens_d(a, b) - r["cohens_d"].get<double>());
      if (d_err > worst) {
        worst = d_err;
        worst_at = tag + " d";
      }
    }
  }
  return {cases == 20 && worst <= kOracleTol,
          fmt::format("{} cases x 2 references, worst deviation {:.2e}{} (limit {:.0e})", cases, worst,
                      worst_at.empty() ? "" : " at " + worst_at, kOracleTol)};
}

Outcome outlier_workflow() {
  const BatteryResult res = run_battery(group10_fixture(), {});
  const StatReport& stsd = report_for(res, Metric::kSTSD);
  bool pass = stsd.outliers == std::vector<int>{10};
  for (Metric m : {Metric::kTST, Metric::kAST, Metric::kSTSD}) {
    const StatReport& r = report_for(res, m);
    pass = pass && r.excluded == std::vector<int>{10} &&
           std::count(r.group_ids.begin(), r.group_ids.end(), 10) == 0 && r.values_a.size() == 11 &&
           r.values_b.size() == 11;
  }
  const bool logged = std::any_of(res.log.begin(), res.log.end(), [](const std::string& l) {
    return l == "group 10 excluded from speaking metrics";
  });
  std::vector<GroupInfo> registry;
  for (int id = 1; id <= 12; ++id) registry.push_back({id, 2, 2, "medium", "medium", false});
  const std::string table = format_experiment_table(registry, {}, outlier_groups(res));
  const bool marked = table.find("\n10**,") != std::string::npos;
  return {pass && logged && marked,
          fmt::format("STSD outliers [{}], excluded from both conditions of TST/AST/STSD: {}, logged: {}, "
                      "table marker: {}",
                      fmt::join(stsd.outliers, ","), pass, logged, marked)};
}

PairFrames brute_force(const std::vector<AttentionRecord>& recs, const std::vector<SpeechSegment>& segs,
                       const SeatingLayout& layout, double fps) {
  PairFrames out{};
  for (const auto& r : recs) {
    if (!r.target.is_participant()) continue;
    const std::string& who = layout.seats[r.target.seat].id;
    const double t0 = r.frame_idx / fps;
    const double t1 = (r.frame_idx + 1) / fps;
    std::set<double> cuts{t0, t1};
    for (const auto& s : segs) {
      if (s.speaker != who) continue;
      if (s.start_s > t0 && s.start_s < t1) cuts.insert(s.start_s);
      if (s.end_s > t0 && s.end_s < t1) cuts.insert(s.end_s);
    }
    bool inside = true;
    for (auto it = cuts.begin(); std::next(it) != cuts.end() && inside; ++it) {
      const double lo = *it;
      const double hi = *std::next(it);
      inside = std::any_of(segs.begin(), segs.end(), [&](const SpeechSegment& s) {
        return s.speaker == who && s.start_s <= lo && hi <= s.end_s;
      });
    }
    if (inside) ++out[r.observer][r.target.seat];
  }
  return out;
}

struct WindowFixture {
  std::vector<AttentionRecord> records;
  std::vector<SpeechSegment> segments;
  SeatingLayout layout;
  double fps = 30.0;
};

WindowFixture random_window_fixture(Gen& g, const SeatingLayout& layout) {
  WindowFixture f;
  f.layout = layout;
  f.fps = g.integer(0, 1) == 0 ? 30.0 : g.uniform(10, 60);
  const int frames = 600;
  const double grid = g.integer(0, 1) == 0 ? 1.0 / f.fps : 0.001 * g.integer(1, 20);
  const double duration = frames / f.fps;
  for (const auto& seat : layout.seats) {
    double t = g.integer(0, 20) * grid;
    while (t < duration) {
      const double len = g.integer(1, 80) * grid;
      f.segments.push_back({seat.id, t, std::min(t + len, duration), std::nullopt});
      t += len + g.integer(0, 60) * grid;
    }
  }
  for (int k = 0; k < frames; ++k) {
    for (std::size_t o = 0; o < layout.seats.size(); ++o) {
      const int pick = g.integer(0, 4);
      AttentionTarget target = pick == 3   ? AttentionTarget::reading()
                               : pick == 4 ? AttentionTarget::unfocused()
                                           : AttentionTarget::participant((o + 1 + pick) % 4);
      f.records.push_back({k, o, target});
    }
  }
  return f;
}

Outcome attention_windowing() {
  Gen g(2007);
  std::vector<WindowFixture> fixtures;
  for (const auto& gf : geometry_fixtures) {
    fixtures.push_back({gf.records, gf.bundle.segments, gf.bundle.session.layout, gf.bundle.session.fps});
  }
  const SeatingLayout layout = geometry_fixtures.empty() ? SeatingLayout{} : geometry_fixtures[0].bundle.session.layout;
  for (int i = 0; i < 100; ++i) fixtures.push_back(random_window_fixture(g, layout));

  int mismatches = 0, bound_violations = 0;
  for (auto& f : fixtures) {
    const auto segs = normalize_segments(f.segments, nullptr);
    const auto st = attention_during_speech(f.records, f.segments, f.layout, f.fps);
    auto shuffled = f.records;
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    if (st.pair_frames != brute_force(f.records, segs, f.layout, f.fps) ||
        attention_during_speech(shuffled, f.segments, f.layout, f.fps).pair_frames != st.pair_frames) {
      ++mismatches;
    }
    const auto sp = speaking_time(segs, f.layout);
    for (std::size_t o = 0; o < 4; ++o) {
      for (std::size_t t = 0; t < 4; ++t) {
        if (st.pair_frames[o][t] / f.fps > sp.per_participant_s[t] + 1e-9) ++bound_violations;
      }
    }
  }
  return {mismatches == 0 && bound_violations == 0,
          fmt::format("{} fixtures: {} streaming/brute-force mismatches, {} attention > speaking cells",
                      fixtures.size(), mismatches, bound_violations)};
}

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "roundtable");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = io::read_text_file(e.path());
  }
  return files;
}

std::string first_difference(const std::map<std::string, std::string>& a,
                             const std::map<std::string, std::string>& b) {
  for (const auto& [name, body] : a) {
    const auto it = b.find(name);
    if (it == b.end()) return name + " missing";
    if (it->second != body) return name + " differs";
  }
  for (const auto& [name, body] : b) {
    if (a.count(name) == 0) return name + " extra";
  }
  return {};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("roundtable_acceptance_{}", ::getpid());
  fs::remove_all(root);
  const fs::path manifest = kSourceDir / "data" / "synthetic" / "manifest.json";
  std::string err;
  for (const char* run : {"run1", "run2"}) {
    if (cli({"pipeline", "--manifest", manifest.string(), "--out", (root / run).string()}, &err) != kExitOk) {
      return {false, fmt::format("pipeline {} failed: {}", run, err)};
    }
  }
  if (cli({"pipeline", "--manifest", manifest.string(), "--out", (root / "run3").string(), "--jobs", "1"}, &err) !=
      kExitOk) {
    return {false, "pipeline --jobs 1 failed: " + err};
  }

  const fs::path staged = root / "staged";
  const auto doc = nlohmann::json::parse(io::read_text_file(manifest));
  std::vector<std::string> metric_files;
  for (const auto& s : doc["sessions"]) {
    const int group = s["group_id"];
    const std::string cond = s["condition"];
    const fs::path dir = staged / "sessions" / fmt::format("group{}_{}", group, cond);
    const fs::path bundle = dir / "bundle";
    const fs::path scenario = manifest.parent_path() / s["scenario"].get<std::string>();
    const std::vector<std::vector<std::string>> steps = {
        {"simulate", "--scenario", scenario.string(), "--out", bundle.string()},
        {"pose", "--bundle", bundle.string(), "--out", (dir / std::string(kPosesFile)).string()},
        {"attention", "--bundle", bundle.string(), "--poses", (dir / std::string(kPosesFile)).string(), "--out",
         (dir / std::string(kAttentionFile)).string()},
        {"align", "--bundle", bundle.string(), "--attention", (dir / std::string(kAttentionFile)).string(), "--out", dir.string()}};
    for (const auto& step : steps) {
      if (cli(step, &err) != kExitOk) return {false, fmt::format("stage {} failed: {}", step[0], err)};
    }
    metric_files.push_back((dir / std::string(kSessionMetricsFile)).string());
  }
  std::vector<std::string> metrics = {"metrics"};
  metrics.insert(metrics.end(), metric_files.begin(), metric_files.end());
  metrics.insert(metrics.end(), {"--out", (staged / std::string(kMetricsFile)).string()});
  if (cli(metrics, &err) != kExitOk) return {false, "stage metrics failed: " + err};
  std::vector<std::string> rep = {"report"};
  rep.insert(rep.end(), metric_files.begin(), metric_files.end());
  rep.insert(rep.end(), {"--metrics", (staged / std::string(kMetricsFile)).string(), "--manifest", manifest.string(), "--out",
                         (staged / "report").string()});
  if (cli(rep, &err) != kExitOk) return {false, "stage report failed: " + err};

  const auto base = snapshot(root / "run1");
  std::string diff;
  for (const char* other : {"run2", "run3", "staged"}) {
    const std::string d = first_difference(base, snapshot(root / other));
    if (!d.empty()) diff += fmt::format(" {}: {};", other, d);
  }
  const std::size_t files = base.size();
  const std::size_t report_files = snapshot(root / "run1" / "report").size();
  fs::remove_all(root);
  return {diff.empty(), diff.empty() ? fmt::format("{} files ({} in report) identical across 2 runs, --jobs 1 "
                                                   "and stage-wise execution",
                                                   files, report_files)
                                     : "differences:" + diff};
}

}  // namespace

int main() {
  run_criterion("geometry-oracle", geometry_oracle);
  run_criterion("pose-recovery", pose_recovery);
  run_criterion("focus-vector-examples", focus_examples);
  run_criterion("scale-invariance", scale_invariance);
  run_criterion("statistics-oracle", stats_oracle);
  run_criterion("outlier-workflow", outlier_workflow);
  run_criterion("attention-windowing", attention_windowing);
  run_criterion("end-to-end-determinism", determinism);
  fmt::print("{} of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
