#include "roundtable/face_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

using nlohmann::json;

namespace {

constexpr double kSymmetryTolerance = 1e-9;

std::size_t slot_of(int landmark) {
  auto it = std::find(kLandmarkIndices.begin(), kLandmarkIndices.end(), landmark);
  return static_cast<std::size_t>(it - kLandmarkIndices.begin());
}

bool mirrored(const Vec3& a, const Vec3& b) {
  return std::abs(a.x() + b.x()) < kSymmetryTolerance && std::abs(a.y() - b.y()) < kSymmetryTolerance &&
         std::abs(a.z() - b.z()) < kSymmetryTolerance;
}

}  // namespace

void FaceModel3D::validate() const {
  if (!points[slot_of(1)].isZero(0.0)) {
    throw ValidationError(fmt::format("face model '{}': nose (1) must be the origin", name));
  }
  if (!mirrored(points[slot_of(130)], points[slot_of(359)]) ||
      !mirrored(points[slot_of(57)], points[slot_of(287)])) {
    throw ValidationError(
        fmt::format("face model '{}': pairs 130/359 and 57/287 must mirror across x = 0", name));
  }
  if (std::abs(points[slot_of(9)].x()) > kSymmetryTolerance) {
    throw ValidationError(fmt::format("face model '{}': landmark 9 must lie on x = 0", name));
  }
  if (!(units_per_meter > 0.0)) throw ValidationError("units_per_meter must be positive");
}

double FaceModel3D::landmark_height() const {
  double lo = points[0].y();
  double hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.y());
    hi = std::max(hi, p.y());
  }
  return hi - lo;
}

FaceModel3D FaceModel3D::generic_v1() {
  // Millimetres, average adult proportions.
  FaceModel3D m;
  m.name = "generic-6pt";
  m.version = 1;
  m.units_per_meter = 1000.0;
  m.points = {
      Vec3(0.0, 0.0, 0.0),       // 1   nose tip
      Vec3(0.0, 48.0, 28.0),     // 9   glabella
      Vec3(24.0, -32.0, 30.0),   // 57  mouth corner, subject's right
      Vec3(45.0, 32.0, 42.0),    // 130 outer eye corner, subject's right
      Vec3(-24.0, -32.0, 30.0),  // 287 mouth corner, subject's left
      Vec3(-45.0, 32.0, 42.0),   // 359 outer eye corner, subject's left
  };
  return m;
}

FaceModel3D parse_face_model(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source, 0, e.what());
  }
  FaceModel3D m;
  try {
    m.name = doc.at("name").get<std::string>();
    m.version = doc.at("version").get<int>();
    m.units_per_meter = doc.at("units_per_meter").get<double>();
    const auto& pts = doc.at("points");
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
      const auto key = std::to_string(kLandmarkIndices[k]);
      auto xyz = pts.at(key).get<std::vector<double>>();
      if (xyz.size() != 3) throw SchemaError(source, 0, fmt::format("point {} needs 3 values", key));
      m.points[k] = Vec3(xyz[0], xyz[1], xyz[2]);
    }
  } catch (const json::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
  m.validate();
  return m;
}

FaceModel3D load_face_model(const std::filesystem::path& path) {
  return parse_face_model(io::read_text_file(path), path.string());
}

std::string format_face_model(const FaceModel3D& model) {
  json pts = json::object();
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto& p = model.points[k];
    pts[std::to_string(kLandmarkIndices[k])] = {p.x(), p.y(), p.z()};
  }
  json doc = {{"name", model.name},
              {"version", model.version},
              {"units_per_meter", model.units_per_meter},
              {"frame", "origin at nose tip; +x subject's right, +y up, +z into the head"},
              {"points", pts}};
  return doc.dump(2) + "\n";
}

}  // namespace roundtable
