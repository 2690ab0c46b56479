#include <gtest/gtest.h>

#include <cmath>

#include "ctxaug/error.hpp"
#include "ctxaug/geometry.hpp"
#include "fixtures.hpp"

using namespace ctxaug;
using ctxaug::testing::random_int_box;

namespace {

/// Counts unit cells of an integer grid covered by a box, and by both boxes.
struct CellCounts {
  long long a = 0, b = 0, both = 0;
};

CellCounts enumerate_cells(const Box& a, const Box& b, int grid) {
  CellCounts c;
  for (int y = 0; y < grid; ++y) {
    for (int x = 0; x < grid; ++x) {
      const Point p{x + 0.5, y + 0.5};
      const bool in_a = a.contains(p), in_b = b.contains(p);
      c.a += in_a;
      c.b += in_b;
      c.both += in_a && in_b;
    }
  }
  return c;
}

double iou_oracle(const Box& a, const Box& b, int grid) {
  const auto c = enumerate_cells(a, b, grid);
  return static_cast<double>(c.both) / static_cast<double>(c.a + c.b - c.both);
}

double coverage_oracle(const Box& inner, const Box& outer, int grid) {
  const auto c = enumerate_cells(inner, outer, grid);
  return static_cast<double>(c.both) / static_cast<double>(c.b);
}

}  // namespace

TEST(Iou, IdenticalBoxes) { EXPECT_DOUBLE_EQ(iou(Box::make(0, 0, 10, 10), Box::make(0, 0, 10, 10)), 1.0); }

TEST(Iou, DisjointBoxes) { EXPECT_DOUBLE_EQ(iou(Box::make(0, 0, 10, 10), Box::make(20, 20, 30, 30)), 0.0); }

TEST(Iou, HalfShiftedBoxMatchesEnumeration) {
  const Box a = Box::make(0, 0, 10, 10), b = Box::make(5, 0, 15, 10);
  EXPECT_NEAR(iou(a, b), iou_oracle(a, b, 30), 1e-12);
  EXPECT_NEAR(iou(a, b), 1.0 / 3.0, 1e-12);
}

TEST(Coverage, SmallBoxInsideLarge) {
  const Box inner = Box::make(2, 2, 4, 4), outer = Box::make(0, 0, 10, 10);
  EXPECT_NEAR(coverage(inner, outer), coverage_oracle(inner, outer, 30), 1e-12);
  EXPECT_NEAR(coverage(inner, outer), 0.04, 1e-12);
}

TEST(Coverage, IdenticalBoxesCoverFully) {
  const Box b = Box::make(3, 4, 9, 12);
  EXPECT_DOUBLE_EQ(coverage(b, b), 1.0);
}

TEST(Coverage, DenominatorIsTheOuterBox) {
  const Box inner = Box::make(0, 0, 10, 10), outer = Box::make(5, 0, 15, 10);
  EXPECT_NEAR(coverage(inner, outer), coverage_oracle(inner, outer, 30), 1e-12);
  EXPECT_NEAR(coverage(inner, outer), 0.5, 1e-12);
  EXPECT_NEAR(coverage(Box::make(0, 0, 2, 2), Box::make(0, 0, 4, 4)), 0.25, 1e-12);
  EXPECT_NEAR(coverage(Box::make(0, 0, 4, 4), Box::make(0, 0, 2, 2)), 1.0, 1e-12);
}

TEST(GeometryProperty, IouAndCoverageMatchPixelEnumeration) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Box a = random_int_box(rng, 64, 64), b = random_int_box(rng, 64, 64);
    ASSERT_NEAR(iou(a, b), iou_oracle(a, b, 64), 1e-9) << a << " " << b;
    ASSERT_NEAR(coverage(a, b), coverage_oracle(a, b, 64), 1e-9) << a << " " << b;
  }
}

TEST(GeometryProperty, IouSymmetricAndBoundedByCoverage) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const double ax = rng.uniform(0, 50), ay = rng.uniform(0, 50);
    const double bx = rng.uniform(0, 50), by = rng.uniform(0, 50);
    const Box p = Box::make(ax, ay, ax + rng.uniform(0.1, 30), ay + rng.uniform(0.1, 30));
    const Box q = Box::make(bx, by, bx + rng.uniform(0.1, 30), by + rng.uniform(0.1, 30));
    ASSERT_DOUBLE_EQ(iou(p, q), iou(q, p));
    ASSERT_LE(iou(p, q), std::min(coverage(p, q), coverage(q, p)) + 1e-15);
  }
}

TEST(ShapeParams, SquareHalfSide) {
  const auto p = shape_params(Box::make(0, 0, 50, 50), 100, 100);
  EXPECT_DOUBLE_EQ(p.scale, 0.5);
  EXPECT_DOUBLE_EQ(p.aspect, 1.0);
}

TEST(ShapeParams, TallBoxInWideImage) {
  const auto p = shape_params(Box::make(10, 10, 30, 90), 200, 100);
  EXPECT_NEAR(p.scale, std::sqrt(1600.0 / 20000.0), 1e-12);
  EXPECT_NEAR(p.scale, 0.282842712474619, 1e-12);
  EXPECT_DOUBLE_EQ(p.aspect, 0.25);
}

TEST(ShapeParams, FullImage) {
  const auto p = shape_params(Box::make(0, 0, 160, 90), 160, 90);
  EXPECT_DOUBLE_EQ(p.scale, 1.0);
  EXPECT_DOUBLE_EQ(p.aspect, 160.0 / 90.0);
}

TEST(ShapeParams, OutsideImageIsAPreconditionError) {
  EXPECT_THROW(shape_params(Box::make(50, 50, 120, 80), 100, 100), PreconditionError);
}

TEST(BoxFromShape, KnownSquare) {
  const Box b = box_from_shape({0.5, 1.0}, {50, 50}, 100, 100);
  EXPECT_NEAR(b.x_min, 25, 1e-12);
  EXPECT_NEAR(b.y_min, 25, 1e-12);
  EXPECT_NEAR(b.x_max, 75, 1e-12);
  EXPECT_NEAR(b.y_max, 75, 1e-12);
}

TEST(BoxFromShape, FullImage) {
  const Box b = box_from_shape({1.0, 160.0 / 90.0}, {80, 45}, 160, 90);
  EXPECT_EQ(b, Box::make(0, 0, 160, 90));
}

TEST(BoxFromShape, NoFitAtBorder) { EXPECT_THROW(box_from_shape({0.5, 1.0}, {10, 50}, 100, 100), NoFit); }

TEST(BoxFromShape, RoundTripsShapeParams) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const int W = 50 + static_cast<int>(rng.below(200)), H = 50 + static_cast<int>(rng.below(200));
    const double w = rng.uniform(1.0, W), h = rng.uniform(1.0, H);
    const double x = rng.uniform(0.0, W - w), y = rng.uniform(0.0, H - h);
    const Box box = Box::make(x, y, x + w, y + h);
    const auto p = shape_params(box, W, H);
    const Box back = box_from_shape(p, box.center(), W, H);
    ASSERT_NEAR(back.x_min, box.x_min, 1e-6);
    ASSERT_NEAR(back.y_min, box.y_min, 1e-6);
    ASSERT_NEAR(back.x_max, box.x_max, 1e-6);
    ASSERT_NEAR(back.y_max, box.y_max, 1e-6);
    const auto p2 = shape_params(back, W, H);
    ASSERT_NEAR(p2.scale, p.scale, 1e-6);
    ASSERT_NEAR(p2.aspect, p.aspect, 1e-6);
  }
}

TEST(Box, RejectsDegenerate) {
  EXPECT_THROW(Box::make(5, 0, 5, 10), PreconditionError);
  EXPECT_THROW(Box::make(0, 10, 5, 2), PreconditionError);
}

TEST(Box, HalfOpenPixels) {
  const auto r = Box::make(2, 3, 7, 9).pixels();
  EXPECT_EQ(r.x0, 2);
  EXPECT_EQ(r.y0, 3);
  EXPECT_EQ(r.x1, 7);
  EXPECT_EQ(r.y1, 9);
}

TEST(TightBox, MatchesForegroundExtent) {
  Mask m(20, 10);
  m.at(3, 2) = 1;
  m.at(11, 7) = 1;
  EXPECT_EQ(*tight_box(m), Box::make(3, 2, 12, 8));
  EXPECT_FALSE(tight_box(Mask(4, 4)).has_value());
}
