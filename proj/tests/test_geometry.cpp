#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "egotopo/common.hpp"
#include "egotopo/geometry.hpp"
#include "egotopo/rng.hpp"

using namespace egotopo;

namespace {

Eigen::Matrix3d random_planted_h(Rng& rng) {
  // Identity plus a mild perspective perturbation, as between two handheld
  // views of a planar surface.
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 0) = 1.0 + 0.2 * rng.gaussian();
  h(1, 1) = 1.0 + 0.2 * rng.gaussian();
  h(0, 1) = 0.1 * rng.gaussian();
  h(1, 0) = 0.1 * rng.gaussian();
  h(0, 2) = 40.0 * rng.gaussian();
  h(1, 2) = 40.0 * rng.gaussian();
  h(2, 0) = 1e-4 * rng.gaussian();
  h(2, 1) = 1e-4 * rng.gaussian();
  return h;
}

Point2 apply_h(const Eigen::Matrix3d& h, const Point2& p) {
  Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Correspondences planted_correspondences(const Eigen::Matrix3d& h, int inliers,
                                        int outliers, Rng& rng) {
  Correspondences c;
  c.video_id = "v";
  c.frame_a = 0;
  c.frame_b = 1;
  for (int i = 0; i < inliers; ++i) {
    Point2 a(rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0));
    c.points_a.push_back(a);
    c.points_b.push_back(apply_h(h, a));
  }
  for (int i = 0; i < outliers; ++i) {
    c.points_a.emplace_back(rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0));
    c.points_b.emplace_back(rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0));
  }
  return c;
}

}  // namespace

TEST_CASE("four-point dlt fits exactly") {
  std::array<Point2, 4> a = {Point2{10, 20}, Point2{300, 15}, Point2{280, 400},
                             Point2{30, 390}};

  SUBCASE("identity") {
    Homography h = dlt_homography(a, a);
    CHECK((h.h - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("pure translation by (5, -2)") {
    std::array<Point2, 4> b;
    for (int i = 0; i < 4; ++i) b[i] = a[i] + Point2(5, -2);
    Homography h = dlt_homography(a, b);
    Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
    expected(0, 2) = 5.0;
    expected(1, 2) = -2.0;
    CHECK((h.h - expected).cwiseAbs().maxCoeff() < 1e-8);
    for (int i = 0; i < 4; ++i) CHECK(reprojection_error(h, a[i], b[i]) < 1e-6);
  }

  SUBCASE("recovers a planted homography to high relative accuracy") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::Matrix3d planted = random_planted_h(rng);
      planted /= planted(2, 2);
      std::array<Point2, 4> src, dst;
      for (int i = 0; i < 4; ++i) {
        src[i] = Point2(rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0));
        dst[i] = apply_h(planted, src[i]);
      }
      Homography fit;
      try {
        fit = dlt_homography(src, dst);
      } catch (const DataError&) {
        continue;  // rare near-degenerate random draw
      }
      double max_rel = 0.0;
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) {
          double denom = std::max(std::abs(planted(r, col)), 1e-3);
          max_rel = std::max(max_rel, std::abs(fit.h(r, col) - planted(r, col)) / denom);
        }
      CHECK(max_rel < 1e-9);
    }
  }

  SUBCASE("rejects degenerate configurations") {
    std::array<Point2, 4> collinear = {Point2{0, 0}, Point2{10, 10}, Point2{20, 20},
                                       Point2{5, 100}};
    CHECK_THROWS_AS(dlt_homography(collinear, a), DataError);
    std::array<Point2, 4> duplicate = {Point2{1, 1}, Point2{1, 1}, Point2{20, 5},
                                       Point2{5, 100}};
    CHECK_THROWS_AS(dlt_homography(duplicate, a), DataError);
  }
}

TEST_CASE("ransac finds the planted inlier set") {
  Rng rng(31);

  SUBCASE("all-inlier input keeps every match") {
    Eigen::Matrix3d planted = random_planted_h(rng);
    Correspondences c = planted_correspondences(planted, 50, 0, rng);
    RansacResult r = ransac_homography(c, {1000, 3.0, 7});
    CHECK(r.inlier_count == 50);
  }

  SUBCASE("70 inliers with 30 uniform outliers") {
    Eigen::Matrix3d planted = random_planted_h(rng);
    Correspondences c = planted_correspondences(planted, 70, 30, rng);
    RansacResult r = ransac_homography(c, {1000, 3.0, 7});
    int true_inliers_found = 0;
    double err_sum = 0.0;
    for (int i = 0; i < 70; ++i) {
      if (r.inlier_mask[i]) ++true_inliers_found;
      err_sum += reprojection_error(r.h, c.points_a[i], c.points_b[i]);
    }
    CHECK(true_inliers_found >= 67);  // >= 95% of 70
    CHECK(err_sum / 70.0 < 1.0);
  }

  SUBCASE("fewer than 4 correspondences is an error") {
    Correspondences c;
    c.points_a = {{0, 0}, {1, 1}, {2, 2}};
    c.points_b = c.points_a;
    CHECK_THROWS_WITH_AS(ransac_homography(c, {100, 3.0, 0}),
                         doctest::Contains("insufficient"), DataError);
  }

  SUBCASE("deterministic given the seed") {
    Eigen::Matrix3d planted = random_planted_h(rng);
    Correspondences c = planted_correspondences(planted, 40, 20, rng);
    RansacResult r1 = ransac_homography(c, {500, 3.0, 42});
    RansacResult r2 = ransac_homography(c, {500, 3.0, 42});
    CHECK(r1.inlier_count == r2.inlier_count);
    CHECK((r1.h.h - r2.h.h).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r1.inlier_mask == r2.inlier_mask);
  }

  SUBCASE("swapping the two sides finds the same inlier set") {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::Matrix3d planted = random_planted_h(rng);
      Correspondences fwd = planted_correspondences(planted, 60, 25, rng);
      Correspondences rev = fwd;
      std::swap(rev.points_a, rev.points_b);
      RansacResult rf = ransac_homography(fwd, {1000, 3.0, 5});
      RansacResult rr = ransac_homography(rev, {1000, 3.0, 5});
      CHECK(rf.inlier_count == rr.inlier_count);
      CHECK(rf.inlier_mask == rr.inlier_mask);
      // The inlier sets agree under an exact refit on either side.
      std::vector<Point2> ina, inb;
      for (std::size_t i = 0; i < fwd.size(); ++i)
        if (rf.inlier_mask[i]) {
          ina.push_back(fwd.points_a[i]);
          inb.push_back(fwd.points_b[i]);
        }
      Homography refit = dlt_homography_n(ina, inb);
      double max_err = 0.0;
      for (std::size_t i = 0; i < ina.size(); ++i)
        max_err = std::max(max_err, reprojection_error(refit, ina[i], inb[i]));
      CHECK(max_err < 1e-3);
    }
  }
}
