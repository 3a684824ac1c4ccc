#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "roundtable/model.hpp"
#include "roundtable/rotation.hpp"

namespace roundtable {

/// Rigid 6-point face in face-local coordinates, ordered as kLandmarkIndices.
///
/// Frame: origin at the nose tip (landmark 1), +x toward the subject's right,
/// +y up, +z back into the head. The face looks along -z.
struct FaceModel3D {
  std::string name;
  int version = 0;
  /// Model units per meter; converts layout distances into model units.
  double units_per_meter = 1000.0;
  std::array<Vec3, kLandmarkCount> points{};

  /// Nose at origin; 130/359 and 57/287 mirrored across x = 0.
  void validate() const;
  /// Vertical extent of the landmarks, in model units.
  double landmark_height() const;

  /// Bundled default, identical to data/face_model_generic_v1.json.
  static FaceModel3D generic_v1();
};

FaceModel3D parse_face_model(std::string_view json_text, const std::string& source);
FaceModel3D load_face_model(const std::filesystem::path& path);
std::string format_face_model(const FaceModel3D& model);

}  // namespace roundtable
