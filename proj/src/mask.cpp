#include "branchrange/mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <nlohmann/json.hpp>

#include "branchrange/io.hpp"

namespace branchrange {

namespace {

using nlohmann::json;

// Clockwise in image coordinates (y down), starting west.
constexpr std::array<std::array<int, 2>, 8> kMoore{{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int direction_of(int dx, int dy) {
  for (int k = 0; k < 8; ++k) {
    if (kMoore[k][0] == dx && kMoore[k][1] == dy) return k;
  }
  return -1;
}

// Labels 8-connected components; returns the label of the largest one (ties
// go to the component found first in row-major order) and its first pixel.
std::vector<int> label_largest(const SegMask& mask, int& best_label, int& first_pixel) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  std::deque<int> queue;
  int next = 0;
  std::size_t best_size = 0;
  best_label = -1;
  first_pixel = -1;
  for (int start = 0; start < w * h; ++start) {
    if (labels[start] >= 0 || mask.bitmap.data()[start] == 0) continue;
    const int label = next++;
    std::size_t size = 0;
    labels[start] = label;
    queue.assign(1, start);
    while (!queue.empty()) {
      const int idx = queue.front();
      queue.pop_front();
      ++size;
      const int x = idx % w;
      const int y = idx / w;
      for (const auto& [dx, dy] : kMoore) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (!mask.contains(nx, ny)) continue;
        const int nidx = ny * w + nx;
        if (labels[nidx] >= 0) continue;
        labels[nidx] = label;
        queue.push_back(nidx);
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = label;
      first_pixel = start;
    }
  }
  return labels;
}

double require_number(const json& value, const char* what) {
  if (!value.is_number()) fail(ErrorKind::ParseError, std::string("expected a number for ") + what);
  const double v = value.get<double>();
  require(std::isfinite(v), ErrorKind::ParseError, std::string("non-finite ") + what);
  return v;
}

void require_nonempty(const SegMask& mask) {
  require(mask.pixel_count() > 0, ErrorKind::EmptyMask, "mask has no branch pixels");
}

}  // namespace

std::size_t SegMask::pixel_count() const {
  return static_cast<std::size_t>(std::count_if(bitmap.data().begin(), bitmap.data().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

MaskFormat mask_format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".json" ? MaskFormat::PolygonJson : MaskFormat::PngBitmask;
}

SegMask mask_from_image(const ImageGray& image) {
  SegMask mask;
  mask.bitmap = MaskBitmap(image.width(), image.height(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) mask.bitmap.data()[i] = image.data()[i] != 0 ? 1 : 0;
  return mask;
}

MaskBitmap rasterize_polygons(int width, int height, const std::vector<Polygon>& polygons) {
  MaskBitmap bitmap(width, height, 0);
  constexpr double kEps = 1e-9;
  std::vector<double> crossings;
  for (int y = 0; y < height; ++y) {
    const double sy = y;
    crossings.clear();
    for (const Polygon& poly : polygons) {
      const std::size_t n = poly.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        if (a.y == b.y) {
          // Horizontal edges only contribute their own pixels.
          if (std::fabs(a.y - sy) < kEps) {
            const int x0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x) - kEps)));
            const int x1 = std::min(width - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + kEps)));
            for (int x = x0; x <= x1; ++x) bitmap.at(x, y) = 1;
          }
          continue;
        }
        const double lo = std::min(a.y, b.y);
        const double hi = std::max(a.y, b.y);
        if (sy < lo - kEps || sy > hi + kEps) continue;
        const double xi = a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y);
        // Pixel centers lying exactly on a slanted or vertical edge.
        const double rx = std::round(xi);
        if (std::fabs(xi - rx) < kEps && rx >= 0 && rx < width) bitmap.at(static_cast<int>(rx), y) = 1;
        // Half-open rule so shared vertices are counted once.
        if ((a.y <= sy && sy < b.y) || (b.y <= sy && sy < a.y)) crossings.push_back(xi);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(crossings[k] - kEps)));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(crossings[k + 1] + kEps)));
      for (int x = x0; x <= x1; ++x) bitmap.at(x, y) = 1;
    }
  }
  return bitmap;
}

SegMask mask_from_polygon_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, std::string("polygon JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorKind::ParseError, "polygon JSON must be an object");
  for (const auto& item : doc.items()) {
    const auto& key = item.key();
    require(key == "width" || key == "height" || key == "polygons", ErrorKind::ParseError,
            "unknown key in polygon JSON: " + key);
  }
  require(doc.contains("width") && doc.contains("height") && doc.contains("polygons"), ErrorKind::ParseError,
          "polygon JSON needs width, height and polygons");
  require(doc["width"].is_number_integer() && doc["height"].is_number_integer(), ErrorKind::ParseError,
          "width and height must be integers");
  const int width = doc["width"].get<int>();
  const int height = doc["height"].get<int>();
  require(width > 0 && height > 0, ErrorKind::ParseError, "width and height must be positive");
  require(doc["polygons"].is_array(), ErrorKind::ParseError, "polygons must be an array");

  SegMask mask;
  for (const json& poly : doc["polygons"]) {
    require(poly.is_array() && poly.size() >= 3, ErrorKind::ParseError, "each polygon needs at least 3 vertices");
    Polygon vertices;
    for (const json& v : poly) {
      require(v.is_array() && v.size() == 2, ErrorKind::ParseError, "vertices must be [x, y] pairs");
      vertices.push_back({require_number(v[0], "x"), require_number(v[1], "y")});
    }
    mask.polygons.push_back(std::move(vertices));
  }
  mask.bitmap = rasterize_polygons(width, height, mask.polygons);
  return mask;
}

SegMask load_mask(const std::filesystem::path& path, MaskFormat format) {
  SegMask mask = format == MaskFormat::PolygonJson ? mask_from_polygon_json(io::read_text_file(path))
                                                   : mask_from_image(io::read_png(path));
  require_nonempty(mask);
  return mask;
}

SegMask load_mask(const std::filesystem::path& path) { return load_mask(path, mask_format_for(path)); }

std::vector<Point2> trace_largest_contour(const SegMask& mask) {
  require_nonempty(mask);
  int label = -1;
  int first = -1;
  const std::vector<int> labels = label_largest(mask, label, first);
  const int w = mask.width();
  const auto inside = [&](int x, int y) { return mask.bitmap.contains(x, y) && labels[y * w + x] == label; };

  const int sx = first % w;
  const int sy = first / w;
  std::vector<Point2> contour{{static_cast<double>(sx), static_cast<double>(sy)}};

  // The west neighbor of the topmost-leftmost pixel is outside the component.
  int cx = sx;
  int cy = sy;
  int back = 0;
  int first_nx = 0;
  int first_ny = 0;
  bool started = false;
  const std::size_t limit = 4 * mask.bitmap.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int dir = (back + k) % 8;
      if (inside(cx + kMoore[dir][0], cy + kMoore[dir][1])) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel

    const int nx = cx + kMoore[found][0];
    const int ny = cy + kMoore[found][1];
    if (started && cx == sx && cy == sy && nx == first_nx && ny == first_ny) {
      contour.pop_back();  // closing return to the start pixel
      break;
    }
    if (!started) {
      started = true;
      first_nx = nx;
      first_ny = ny;
    }
    // The last outside neighbor examined becomes the backtrack of the next pixel.
    const int prev = (found + 7) % 8;
    back = direction_of(cx + kMoore[prev][0] - nx, cy + kMoore[prev][1] - ny);
    cx = nx;
    cy = ny;
    contour.push_back({static_cast<double>(cx), static_cast<double>(cy)});
  }
  return contour;
}

int adaptive_stride(std::size_t boundary_length) {
  return std::max(1, static_cast<int>((boundary_length + 89) / 90));
}

SamplePoints sample_contour(const SegMask& mask, int stride) {
  require(stride >= 0, ErrorKind::InvalidParams, "stride must be >= 1 (or 0 for adaptive)");
  const std::vector<Point2> contour = trace_largest_contour(mask);
  require(contour.size() >= 3, ErrorKind::DegenerateMask,
          "boundary has " + std::to_string(contour.size()) + " points, need at least 3");
  const std::size_t step = static_cast<std::size_t>(stride == 0 ? adaptive_stride(contour.size()) : stride);
  SamplePoints samples;
  for (std::size_t i = 0; i < contour.size(); i += step) samples.points.push_back(contour[i]);
  return samples;
}

}  // namespace branchrange
