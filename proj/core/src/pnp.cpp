#include "roundtable/pnp.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "roundtable/errors.hpp"
#include "roundtable/panorama.hpp"

namespace roundtable {

namespace {

using Jacobian = Eigen::Matrix<double, 2 * kLandmarkCount, 6>;
using Residual = Eigen::Matrix<double, 2 * kLandmarkCount, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

constexpr double kCollinearRatio = 1e-9;
constexpr double kInitialLambda = 1e-3;
constexpr double kMaxLambda = 1e12;

void check_geometry(std::span<const Point2, kLandmarkCount> px) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : px) mean += Eigen::Vector2d(p.x, p.y);
  mean /= static_cast<double>(kLandmarkCount);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : px) {
    Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double hi = eig.eigenvalues()(1);
  const double lo = eig.eigenvalues()(0);
  if (!(hi > 0.0) || lo <= kCollinearRatio * hi) {
    throw DegenerateError("degenerate configuration: landmarks are collinear or coincident");
  }
}

double spread(std::span<const Point2, kLandmarkCount> px) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : px) mean += Eigen::Vector2d(p.x, p.y);
  mean /= static_cast<double>(kLandmarkCount);
  double s = 0.0;
  for (const auto& p : px) s += (Eigen::Vector2d(p.x, p.y) - mean).squaredNorm();
  return std::sqrt(s / kLandmarkCount);
}

double model_spread(const FaceModel3D& model) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : model.points) mean += p.head<2>();
  mean /= static_cast<double>(kLandmarkCount);
  double s = 0.0;
  for (const auto& p : model.points) s += (p.head<2>() - mean).squaredNorm();
  return std::sqrt(s / kLandmarkCount);
}

// Returns false when a point falls behind the camera.
bool evaluate(std::span<const Point2, kLandmarkCount> px, const FaceModel3D& model,
              const CameraModel& camera, const Mat3& r, const Vec3& t, Residual& res,
              Jacobian* jac) {
  const double f = camera.focal();
  const Point2 c = camera.principal();
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const Vec3 rp = r * model.points[k];
    const Vec3 x = rp + t;
    if (x.z() <= 1e-9) return false;
    const double iz = 1.0 / x.z();
    res(2 * k) = (c.x - f * x.x() * iz) - px[k].x;
    res(2 * k + 1) = (c.y - f * x.y() * iz) - px[k].y;
    if (jac) {
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << -f * iz, 0.0, f * x.x() * iz * iz,  //
          0.0, -f * iz, f * x.y() * iz * iz;
      jac->block<2, 3>(2 * k, 0) = dproj * (-hat(rp));
      jac->block<2, 3>(2 * k, 3) = dproj;
    }
  }
  return true;
}

}  // namespace

std::array<Point2, kLandmarkCount> project_model(const FaceModel3D& model,
                                                 const CameraModel& camera, const Mat3& r,
                                                 const Vec3& t) {
  std::array<Point2, kLandmarkCount> out{};
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    out[k] = project_pinhole(r * model.points[k] + t, camera);
  }
  return out;
}

double reprojection_rmse(std::span<const Point2, kLandmarkCount> pixels,
                         const FaceModel3D& model, const CameraModel& camera, const Mat3& r,
                         const Vec3& t) {
  Residual res;
  if (!evaluate(pixels, model, camera, r, t, res, nullptr)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::sqrt(res.squaredNorm() / kLandmarkCount);
}

PnpSolution solve_pnp(std::span<const Point2, kLandmarkCount> pixels, const FaceModel3D& model,
                      const CameraModel& camera, const PnpOptions& options) {
  check_geometry(pixels);
  const double f = camera.focal();
  const Point2 c = camera.principal();

  const double depth = options.initial_depth.value_or(f * model_spread(model) / spread(pixels));
  Mat3 r = Mat3::Identity();
  Vec3 t(-(pixels[0].x - c.x) / f, -(pixels[0].y - c.y) / f, 1.0);
  t *= depth;

  PnpSolution sol;
  Residual res;
  Jacobian jac;
  if (!evaluate(pixels, model, camera, r, t, res, &jac)) {
    throw DegenerateError("initial pose places the model behind the camera");
  }
  double cost = res.squaredNorm();
  sol.initial_rmse_px = std::sqrt(cost / kLandmarkCount);

  double lambda = kInitialLambda;
  Residual trial_res;
  for (sol.iterations = 0; sol.iterations < options.max_iterations && !sol.converged;) {
    ++sol.iterations;
    const Mat6 h = jac.transpose() * jac;
    const Vec6 g = jac.transpose() * res;
    bool accepted = false;
    while (!accepted) {
      Mat6 a = h;
      a.diagonal() += lambda * h.diagonal().cwiseMax(1e-12);
      const Vec6 step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
        continue;
      }
      if (step.norm() < options.step_tolerance) {
        sol.converged = true;
        break;
      }
      const Mat3 r_new = rotation_vec_to_matrix(step.head<3>()) * r;
      const Vec3 t_new = t + step.tail<3>();
      if (evaluate(pixels, model, camera, r_new, t_new, trial_res, nullptr) &&
          trial_res.squaredNorm() < cost) {
        r = r_new;
        t = t_new;
        cost = trial_res.squaredNorm();
        lambda = std::max(lambda / 10.0, 1e-12);
        evaluate(pixels, model, camera, r, t, res, &jac);
        accepted = true;
      } else {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
      }
    }
    // No descent direction left at working precision: a minimum.
    if (!accepted && !sol.converged) sol.converged = true;
  }

  // Re-orthonormalize against accumulated round-off.
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = svd.matrixU() * svd.matrixV().transpose();

  sol.rotation_vec = matrix_to_rotation_vec(r);
  sol.translation = t;
  sol.rmse_px = reprojection_rmse(pixels, model, camera, r, t);
  return sol;
}

}  // namespace roundtable
