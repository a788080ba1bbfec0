#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace egotopo {

using Point2 = Eigen::Vector2d;

// Matched keypoints between two frames; produced externally.
struct Correspondences {
  std::string video_id;
  int frame_a = 0;
  int frame_b = 0;
  std::vector<Point2> points_a;
  std::vector<Point2> points_b;

  std::size_t size() const { return points_a.size(); }
};

struct Homography {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  // h(2,2) normalized to 1

  Point2 apply(const Point2& p) const {
    Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
  }
};

struct RansacConfig {
  int iters = 1000;
  double inlier_px = 3.0;
  std::uint64_t seed = 0;
};

struct RansacResult {
  Homography h;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
};

// Exact 4-point direct linear transform with Hartley normalization. Throws
// DataError on degenerate configurations (duplicate points, three collinear).
Homography dlt_homography(const std::array<Point2, 4>& pts_a,
                          const std::array<Point2, 4>& pts_b);

// Least-squares DLT over n >= 4 correspondences (used by tests for refits).
Homography dlt_homography_n(const std::vector<Point2>& pts_a,
                            const std::vector<Point2>& pts_b);

double reprojection_error(const Homography& h, const Point2& a, const Point2& b);

// Classic 4-point RANSAC maximizing the inlier count; deterministic given
// cfg.seed. Throws DataError when fewer than 4 correspondences are supplied.
RansacResult ransac_homography(const Correspondences& c, const RansacConfig& cfg);

}  // namespace egotopo
