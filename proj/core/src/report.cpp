#include "roundtable/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/angles.hpp"
#include "roundtable/bundle_io.hpp"

namespace roundtable {

namespace {

using nlohmann::ordered_json;

constexpr std::array<const char*, 4> kPalette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a"};

struct Rgb {
  double r, g, b;
};
constexpr Rgb kLow{247, 251, 255};
constexpr Rgb kHigh{8, 48, 107};

std::string lerp_color(double t) {
  auto ch = [t](double a, double b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return fmt::format("#{:02x}{:02x}{:02x}", ch(kLow.r, kHigh.r), ch(kLow.g, kHigh.g),
                     ch(kLow.b, kHigh.b));
}

std::string minutes_cell(const std::optional<double>& m) {
  return m ? fmt::format("{:.2f}", *m) : std::string();
}

std::string mmss(double seconds) {
  const long total = std::lround(seconds);
  return fmt::format("{}:{:02d}", total / 60, total % 60);
}

struct Polar {
  double x, y;
};

Polar polar(double cx, double cy, double radius, double deg) {
  const double a = deg_to_rad(deg - 90.0);  // 0 deg at the top, clockwise
  return {cx + radius * std::cos(a), cy + radius * std::sin(a)};
}

template <typename... Args>
void put(fmt::memory_buffer& out, fmt::format_string<Args...> f, Args&&... args) {
  fmt::format_to(std::back_inserter(out), f, std::forward<Args>(args)...);
}

std::string svg_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

HeatmapData heatmap_data(const std::vector<SessionMetrics>& sessions) {
  std::map<int, std::array<std::optional<double>, 2>> cells;
  for (const auto& s : sessions) {
    cells[s.group_id][s.condition == Condition::kNoCoordination ? 0 : 1] = s.speaking.tst_s / 60.0;
  }
  HeatmapData d;
  for (const auto& [g, c] : cells) {
    d.groups.push_back(g);
    d.minutes.push_back(c);
  }
  return d;
}

std::string format_heatmap_csv(const HeatmapData& data) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "group,A,B\n");
  for (std::size_t i = 0; i < data.groups.size(); ++i) {
    fmt::format_to(std::back_inserter(out), "{},{},{}\n", data.groups[i],
                   minutes_cell(data.minutes[i][0]), minutes_cell(data.minutes[i][1]));
  }
  return fmt::to_string(out);
}

std::string render_heatmap_svg(const HeatmapData& data) {
  constexpr int kLabelW = 90, kCellW = 120, kCellH = 28, kTop = 56;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& row : data.minutes) {
    for (const auto& c : row) {
      if (!c) continue;
      lo = any ? std::min(lo, *c) : *c;
      hi = any ? std::max(hi, *c) : *c;
      any = true;
    }
  }
  const int width = kLabelW + 2 * kCellW + 20;
  const int height = kTop + static_cast<int>(data.groups.size()) * kCellH + 20;
  fmt::memory_buffer out;
  put(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  put(out, "<!-- Total speaking time (minutes) per group and activity.\n");
  put(out, "     Color scale: linear in minutes, {} (min = {:.2f}) to {} (max = {:.2f}).\n",
    lerp_color(0.0), lo, lerp_color(1.0), hi);
  put(out, "     Blank cells: session missing. -->\n");
  put(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
    "font-family=\"sans-serif\" font-size=\"13\">\n",
    width, height, width, height);
  put(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  put(out, "<text x=\"{}\" y=\"20\" font-size=\"15\">Speaking time (min)</text>\n", kLabelW);
  put(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Activity A</text>\n", kLabelW + kCellW / 2, kTop - 8);
  put(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Activity B</text>\n", kLabelW + kCellW + kCellW / 2,
    kTop - 8);
  for (std::size_t i = 0; i < data.groups.size(); ++i) {
    const int y = kTop + static_cast<int>(i) * kCellH;
    put(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">Group {}</text>\n", kLabelW - 8, y + kCellH / 2 + 5,
      data.groups[i]);
    for (int c = 0; c < 2; ++c) {
      const int x = kLabelW + c * kCellW;
      const auto& v = data.minutes[i][static_cast<std::size_t>(c)];
      if (!v) {
        put(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#bbbbbb\"/>\n", x, y,
          kCellW, kCellH);
        continue;
      }
      const double t = hi > lo ? (*v - lo) / (hi - lo) : 0.0;
      put(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"white\"/>\n", x, y, kCellW,
        kCellH, lerp_color(t));
      put(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{}\">{:.2f}</text>\n", x + kCellW / 2,
        y + kCellH / 2 + 5, t > 0.5 ? "white" : "black", *v);
    }
  }
  put(out, "</svg>\n");
  return fmt::to_string(out);
}

ChordData chord_data(const SessionMetrics& metrics) {
  ChordData d;
  d.group_id = metrics.group_id;
  d.condition = metrics.condition;
  d.participants = metrics.participants;
  d.speaking_s = metrics.speaking.per_participant_s;
  for (std::size_t o = 0; o < kParticipantsPerSession; ++o) {
    for (std::size_t t = 0; t < kParticipantsPerSession; ++t) {
      const auto frames = metrics.attention.pair_frames[o][t];
      if (o == t || frames == 0) continue;
      d.ribbons.push_back({o, t, frames, static_cast<double>(frames) / metrics.fps});
    }
  }
  return d;
}

std::string format_chord_json(const ChordData& data) {
  ordered_json arcs = ordered_json::array();
  for (std::size_t i = 0; i < data.participants.size(); ++i) {
    arcs.push_back({{"participant", data.participants[i]}, {"speaking_s", data.speaking_s[i]}});
  }
  ordered_json ribbons = ordered_json::array();
  for (const auto& r : data.ribbons) {
    ribbons.push_back({{"from", data.participants.at(r.from)},
                       {"to", data.participants.at(r.to)},
                       {"frames", r.frames},
                       {"attention_s", r.attention_s}});
  }
  ordered_json j;
  j["format"] = "roundtable-chord/1";
  j["group_id"] = data.group_id;
  j["condition"] = to_string(data.condition);
  j["arcs"] = std::move(arcs);
  j["ribbons"] = std::move(ribbons);
  return j.dump(2) + "\n";
}

std::string render_chord_svg(const ChordData& data) {
  constexpr double kSize = 480.0, kC = 240.0, kR = 180.0, kInner = 168.0, kGapDeg = 4.0;
  constexpr double kMaxRibbon = 14.0;
  const std::size_t n = data.participants.size();
  double total = 0.0;
  for (double s : data.speaking_s) total += s;
  double max_att = 0.0;
  for (const auto& r : data.ribbons) max_att = std::max(max_att, r.attention_s);

  std::vector<double> start(n), sweep(n);
  double cursor = 0.0;
  const double usable = 360.0 - kGapDeg * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    start[i] = cursor;
    sweep[i] = total > 0.0 ? usable * data.speaking_s[i] / total : 0.0;
    cursor += total > 0.0 ? sweep[i] + kGapDeg : 360.0 / static_cast<double>(n);
  }

  fmt::memory_buffer out;
  put(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  put(out, "<!-- Group {} activity {}: arc length ~ speaking time, ribbon width ~ attention time "
    "while the target speaks (linear, widest = {:.3f} s). -->\n",
    data.group_id, to_string(data.condition), max_att);
  put(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\" "
    "font-family=\"sans-serif\" font-size=\"13\">\n",
    kSize);
  put(out, "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" markerWidth=\"4\" "
    "markerHeight=\"4\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" "
    "fill=\"#555555\"/></marker></defs>\n");
  put(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  put(out, "<text x=\"12\" y=\"22\" font-size=\"15\">Group {} - Activity {}</text>\n", data.group_id,
    to_string(data.condition));
  if (total <= 0.0) {
    put(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#888888\">no speech recorded</text>\n", kC,
      kC);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const char* color = kPalette[i % kPalette.size()];
    if (sweep[i] > 0.0) {
      const auto a = polar(kC, kC, kR, start[i]);
      const auto b = polar(kC, kC, kR, start[i] + sweep[i]);
      put(out, "<path d=\"M{:.3f},{:.3f} A{:.3f},{:.3f} 0 {} 1 {:.3f},{:.3f}\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"16\"/>\n",
        a.x, a.y, kR, kR, sweep[i] > 180.0 ? 1 : 0, b.x, b.y, color);
    }
    const auto label = polar(kC, kC, kR + 30.0, start[i] + sweep[i] / 2.0);
    put(out, "<text x=\"{:.3f}\" y=\"{:.3f}\" text-anchor=\"middle\" fill=\"{}\">{} ({:.1f} s)</text>\n", label.x,
      label.y + 4.0, color, svg_escape(data.participants[i]), data.speaking_s[i]);
  }
  for (const auto& r : data.ribbons) {
    // Endpoints offset within each arc by direction.
    const double from_deg = start[r.from] + sweep[r.from] * (0.25 + 0.5 * static_cast<double>(r.to) / 4.0);
    const double to_deg = start[r.to] + sweep[r.to] * (0.25 + 0.5 * static_cast<double>(r.from) / 4.0);
    const auto a = polar(kC, kC, kInner, from_deg);
    const auto b = polar(kC, kC, kInner, to_deg);
    const double width = max_att > 0.0 ? std::max(0.5, kMaxRibbon * r.attention_s / max_att) : 0.5;
    put(out, "<path d=\"M{:.3f},{:.3f} Q{:.3f},{:.3f} {:.3f},{:.3f}\" fill=\"none\" stroke=\"{}\" "
      "stroke-opacity=\"0.55\" stroke-width=\"{:.3f}\" marker-end=\"url(#head)\"/>\n",
      a.x, a.y, kC, kC, b.x, b.y, kPalette[r.from % kPalette.size()], width);
  }
  put(out, "</svg>\n");
  return fmt::to_string(out);
}

std::vector<int> outlier_groups(const BatteryResult& result) {
  std::set<int> g;
  for (const auto& r : result.reports) {
    const auto& src = result.options.exclude_outliers ? r.excluded : r.outliers;
    g.insert(src.begin(), src.end());
  }
  return {g.begin(), g.end()};
}

std::string format_experiment_table(const std::vector<GroupInfo>& registry,
                                    const std::vector<SessionMetrics>& sessions,
                                    const std::vector<int>& outliers) {
  std::map<int, const GroupInfo*> info;
  for (const auto& g : registry) info[g.group_id] = &g;
  std::map<int, std::array<std::optional<double>, 2>> durations;
  for (const auto& s : sessions) {
    durations[s.group_id][s.condition == Condition::kNoCoordination ? 0 : 1] = s.duration_s;
  }
  std::set<int> ids;
  for (const auto& [g, _] : info) ids.insert(g);
  for (const auto& [g, _] : durations) ids.insert(g);
  const std::set<int> out_set(outliers.begin(), outliers.end());

  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out),
                 "group,male,female,time_A,time_B,complexity_A,complexity_B,note\n");
  for (int g : ids) {
    const GroupInfo* gi = info.count(g) ? info[g] : nullptr;
    const bool star = gi && gi->excluded;
    const bool outlier = out_set.count(g) > 0;
    std::string label = std::to_string(g) + (star ? "*" : "") + (outlier ? "**" : "");
    std::string note;
    if (star) note = "participants did not follow the instructions";
    if (outlier) note += std::string(note.empty() ? "" : "; ") + "outlier";
    const auto& d = durations[g];
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", label,
                   gi ? std::to_string(gi->male) : "", gi ? std::to_string(gi->female) : "",
                   d[0] ? mmss(*d[0]) : "", d[1] ? mmss(*d[1]) : "", gi ? gi->outcome_a : "",
                   gi ? gi->outcome_b : "", note);
  }
  return fmt::to_string(out);
}

void emit_report(const std::filesystem::path& dir, const ReportInputs& inputs) {
  std::filesystem::create_directories(dir);
  const auto heat = heatmap_data(inputs.sessions);
  io::write_text_file(dir / "heatmap.csv", format_heatmap_csv(heat));
  io::write_text_file(dir / "heatmap.svg", render_heatmap_svg(heat));
  for (const auto& s : inputs.sessions) {
    const auto chord = chord_data(s);
    const std::string stem = fmt::format("group{}_{}_chord", s.group_id, to_string(s.condition));
    io::write_text_file(dir / (stem + ".json"), format_chord_json(chord));
    io::write_text_file(dir / (stem + ".svg"), render_chord_svg(chord));
  }
  const auto outliers = inputs.stats ? outlier_groups(*inputs.stats) : std::vector<int>{};
  io::write_text_file(dir / "experiment_table.csv",
                      format_experiment_table(inputs.registry, inputs.sessions, outliers));
  if (inputs.stats) {
    io::write_text_file(dir / "stats.json", format_stats_json(*inputs.stats));
    io::write_text_file(dir / "stats.txt", format_stats_text(*inputs.stats));
  }
}

}  // namespace roundtable
