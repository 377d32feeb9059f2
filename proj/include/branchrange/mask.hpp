#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "branchrange/core.hpp"

namespace branchrange {

using MaskBitmap = Grid<std::uint8_t, struct MaskTag>;
using Polygon = std::vector<Point2>;

/// Branch segmentation region produced by an external segmentation model.
/// Bitmap entries are 0 or 1; polygons are kept when the mask came from one.
struct SegMask {
  MaskBitmap bitmap;
  std::vector<Polygon> polygons;

  int width() const noexcept { return bitmap.width(); }
  int height() const noexcept { return bitmap.height(); }
  bool contains(int x, int y) const { return bitmap.contains(x, y) && bitmap.at(x, y) != 0; }
  std::size_t pixel_count() const;
};

enum class MaskFormat { PngBitmask, PolygonJson };

/// `.json` selects PolygonJson, everything else PngBitmask.
MaskFormat mask_format_for(const std::filesystem::path& path);

/// Loads and validates a mask. Throws ParseError on malformed input and
/// EmptyMask when no pixel is marked.
SegMask load_mask(const std::filesystem::path& path, MaskFormat format);
SegMask load_mask(const std::filesystem::path& path);

/// Any nonzero pixel is branch.
SegMask mask_from_image(const ImageGray& image);

/// Parses {"width":W,"height":H,"polygons":[[[x,y],...],...]}.
SegMask mask_from_polygon_json(const std::string& text);

/// Vertices are pixel-center coordinates. A pixel is set when its center is
/// inside under the even-odd rule over all polygons, or lies on an edge.
MaskBitmap rasterize_polygons(int width, int height, const std::vector<Polygon>& polygons);

/// The point set that seeds distance estimation, in contour order.
struct SamplePoints {
  std::vector<Point2> points;
};

/// Clockwise Moore-neighborhood trace of the largest 8-connected component,
/// starting at its topmost-then-leftmost pixel. Pixels may repeat where the
/// region is one pixel thin.
std::vector<Point2> trace_largest_contour(const SegMask& mask);

/// ceil(boundary_length / 90), at least 1.
int adaptive_stride(std::size_t boundary_length);

/// Every `stride`-th traced contour point, starting with the first. A stride
/// of 0 selects `adaptive_stride`. Throws DegenerateMask when the contour has
/// fewer than 3 points.
SamplePoints sample_contour(const SegMask& mask, int stride);

}  // namespace branchrange
