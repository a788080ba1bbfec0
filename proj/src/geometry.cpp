#include "egotopo/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "egotopo/common.hpp"
#include "egotopo/rng.hpp"

namespace egotopo {

namespace {

// Similarity transform moving the centroid to the origin and the mean
// distance to sqrt(2) (Hartley normalization).
Eigen::Matrix3d normalizing_transform(const Point2* pts, std::size_t n) {
  Point2 centroid = Point2::Zero();
  for (std::size_t i = 0; i < n; ++i) centroid += pts[i];
  centroid /= static_cast<double>(n);
  double mean_dist = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_dist += (pts[i] - centroid).norm();
  mean_dist /= static_cast<double>(n);
  double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << scale, 0, -scale * centroid.x(), 0, scale, -scale * centroid.y(), 0, 0, 1;
  return t;
}

bool three_collinear(const Point2& a, const Point2& b, const Point2& c, double tol) {
  double area2 = std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                          (b.y() - a.y()) * (c.x() - a.x()));
  double scale = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm(), 1.0});
  return area2 < tol * scale * scale;
}

void check_four_point_configuration(const Point2* pts, const char* side) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if ((pts[i] - pts[j]).norm() < 1e-9)
        throw DataError(std::string("degenerate homography points (duplicate in ") +
                        side + ")");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (three_collinear(pts[i], pts[j], pts[k], 1e-9))
          throw DataError(std::string("degenerate homography points (collinear in ") +
                          side + ")");
}

Homography dlt_impl(const Point2* a, const Point2* b, std::size_t n) {
  Eigen::Matrix3d ta = normalizing_transform(a, n);
  Eigen::Matrix3d tb = normalizing_transform(b, n);

  Eigen::MatrixXd m(2 * static_cast<Eigen::Index>(n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d pa = ta * Eigen::Vector3d(a[i].x(), a[i].y(), 1.0);
    Eigen::Vector3d pb = tb * Eigen::Vector3d(b[i].x(), b[i].y(), 1.0);
    double x = pa.x() / pa.z(), y = pa.y() / pa.z();
    double u = pb.x() / pb.z(), v = pb.y() / pb.z();
    m.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    m.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::VectorXd hvec = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);

  Eigen::Matrix3d h = tb.inverse() * hn * ta;
  if (std::abs(h(2, 2)) < 1e-12 * h.norm())
    throw DataError("degenerate homography (singular solution)");
  h /= h(2, 2);
  if (std::abs(h.determinant()) < 1e-12)
    throw DataError("degenerate homography (non-invertible)");
  Homography out;
  out.h = h;
  return out;
}

}  // namespace

Homography dlt_homography(const std::array<Point2, 4>& pts_a,
                          const std::array<Point2, 4>& pts_b) {
  check_four_point_configuration(pts_a.data(), "source");
  check_four_point_configuration(pts_b.data(), "target");
  return dlt_impl(pts_a.data(), pts_b.data(), 4);
}

Homography dlt_homography_n(const std::vector<Point2>& pts_a,
                            const std::vector<Point2>& pts_b) {
  if (pts_a.size() != pts_b.size() || pts_a.size() < 4)
    throw DataError("need at least 4 matched points");
  return dlt_impl(pts_a.data(), pts_b.data(), pts_a.size());
}

double reprojection_error(const Homography& h, const Point2& a, const Point2& b) {
  return (h.apply(a) - b).norm();
}

RansacResult ransac_homography(const Correspondences& c, const RansacConfig& cfg) {
  const std::size_t n = c.size();
  if (c.points_b.size() != n) throw DataError("correspondence arrays differ in length");
  if (n < 4) throw DataError("insufficient matches for homography (need 4, have " +
                             std::to_string(n) + ")");
  for (std::size_t i = 0; i < n; ++i)
    if (!c.points_a[i].allFinite() || !c.points_b[i].allFinite())
      throw DataError("non-finite correspondence coordinates");

  Rng rng(cfg.seed);
  RansacResult best;
  best.inlier_mask.assign(n, false);

  std::vector<double> errs(n);
  for (int it = 0; it < cfg.iters; ++it) {
    // Draw 4 distinct indices.
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4;) {
      std::size_t cand = rng.uniform_index(n);
      bool dup = false;
      for (int j = 0; j < k; ++j) dup |= (idx[j] == cand);
      if (!dup) idx[k++] = cand;
    }
    std::array<Point2, 4> sa, sb;
    for (int k = 0; k < 4; ++k) {
      sa[k] = c.points_a[idx[k]];
      sb[k] = c.points_b[idx[k]];
    }
    Homography h;
    try {
      h = dlt_homography(sa, sb);
    } catch (const DataError&) {
      continue;  // degenerate minimal sample
    }
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      errs[i] = reprojection_error(h, c.points_a[i], c.points_b[i]);
      if (errs[i] <= cfg.inlier_px) ++count;
    }
    if (count > best.inlier_count) {
      best.inlier_count = count;
      best.h = h;
      for (std::size_t i = 0; i < n; ++i) best.inlier_mask[i] = errs[i] <= cfg.inlier_px;
    }
  }
  if (best.inlier_count < 4)
    throw DataError("ransac found no non-degenerate hypothesis");
  return best;
}

}  // namespace egotopo
