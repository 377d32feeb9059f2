#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <sstream>

#include "branchrange/cli.hpp"
#include "branchrange/config.hpp"
#include "branchrange/core.hpp"
#include "branchrange/eval.hpp"
#include "branchrange/io.hpp"
#include "branchrange/mask.hpp"
#include "branchrange/ranger.hpp"
#include "branchrange/refine.hpp"
#include "branchrange/stereo.hpp"
#include "branchrange/synth.hpp"

namespace py = pybind11;
using namespace branchrange;

namespace {

template <class T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <class Grid>
Grid grid_from_array(const Array<typename Grid::value_type>& a, const char* name) {
  if (a.ndim() != 2) throw py::value_error(std::string(name) + " must be a 2-D array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  std::vector<typename Grid::value_type> data(a.data(), a.data() + a.size());
  return Grid(w, h, std::move(data));
}

template <class Grid>
py::array_t<typename Grid::value_type> grid_to_array(const Grid& g) {
  py::array_t<typename Grid::value_type> out({g.height(), g.width()});
  if (g.size() > 0) std::memcpy(out.mutable_data(), g.data().data(), g.size() * sizeof(typename Grid::value_type));
  return out;
}

ImageGray image(const Array<std::uint8_t>& a, const char* name = "image") { return grid_from_array<ImageGray>(a, name); }
DisparityMap disparity(const Array<float>& a) { return grid_from_array<DisparityMap>(a, "disparity"); }
DepthMap depth(const Array<float>& a) { return grid_from_array<DepthMap>(a, "depth"); }

SegMask mask(const Array<std::uint8_t>& a) { return mask_from_image(image(a, "mask")); }

RunConfig run_config(const std::string& config_json) {
  return config_json.empty() ? RunConfig{} : config_from_json(nlohmann::json::parse(config_json));
}

py::dict bundle_to_dict(const SceneBundle& b) {
  py::dict d;
  d["left"] = grid_to_array(b.left);
  d["right"] = grid_to_array(b.right);
  d["gt_disparity"] = grid_to_array(b.gt_disparity);
  d["gt_depth"] = grid_to_array(b.gt_depth);
  d["mask"] = grid_to_array(b.mask.bitmap);
  d["spec"] = scene_spec_to_json(b.spec).dump();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stereo ranging toolkit core";

  static py::exception<Error> error_type(m, "BranchrangeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(py::str(e.what()));
      exc.attr("kind") = py::str(std::string(to_string(e.kind())));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<CameraRig>(m, "CameraRig")
      .def(py::init<>())
      .def_readwrite("focal_px", &CameraRig::focal_px)
      .def_readwrite("baseline_m", &CameraRig::baseline_m)
      .def_readwrite("cx_px", &CameraRig::cx_px)
      .def_readwrite("cy_px", &CameraRig::cy_px)
      .def_readwrite("width_px", &CameraRig::width_px)
      .def_readwrite("height_px", &CameraRig::height_px);

  py::enum_<CostMetric>(m, "CostMetric").value("SAD", CostMetric::SAD).value("Census", CostMetric::Census);

  py::class_<MatchParams>(m, "MatchParams")
      .def(py::init([](CostMetric metric) { return default_match_params(metric); }),
           py::arg("metric") = CostMetric::Census)
      .def_readwrite("metric", &MatchParams::metric)
      .def_readwrite("d_max", &MatchParams::d_max)
      .def_readwrite("window_radius", &MatchParams::window_radius)
      .def_readwrite("p1", &MatchParams::p1)
      .def_readwrite("p2", &MatchParams::p2)
      .def_readwrite("paths", &MatchParams::paths)
      .def_readwrite("lr_tol", &MatchParams::lr_tol)
      .def_readwrite("speckle_max_size", &MatchParams::speckle_max_size)
      .def_readwrite("speckle_diff", &MatchParams::speckle_diff)
      .def_readwrite("subpixel", &MatchParams::subpixel)
      .def_readwrite("uniqueness_ratio", &MatchParams::uniqueness_ratio);

  py::class_<WlsParams>(m, "WlsParams")
      .def(py::init<>())
      .def_readwrite("lambda_", &WlsParams::lambda)
      .def_readwrite("sigma_color", &WlsParams::sigma_color)
      .def_readwrite("iterations", &WlsParams::iterations)
      .def_readwrite("fill_invalid", &WlsParams::fill_invalid);

  py::class_<RangerParams>(m, "RangerParams")
      .def(py::init<>())
      .def_readwrite("m", &RangerParams::m)
      .def_readwrite("expand_radius_px", &RangerParams::expand_radius_px)
      .def_readwrite("k_mad", &RangerParams::k_mad)
      .def_readwrite("stride", &RangerParams::stride);

  py::class_<RangeEstimate>(m, "RangeEstimate")
      .def_readonly("distance_m", &RangeEstimate::distance_m)
      .def_readonly("median_m", &RangeEstimate::median_m)
      .def_readonly("mad_m", &RangeEstimate::mad_m)
      .def_readonly("n_points", &RangeEstimate::n_points)
      .def_readonly("n_centroids", &RangeEstimate::n_centroids)
      .def_readonly("n_total", &RangeEstimate::n_total)
      .def_readonly("n_valid_depths", &RangeEstimate::n_valid_depths)
      .def_readonly("n_retained", &RangeEstimate::n_retained)
      .def_readonly("retained_values", &RangeEstimate::retained_values)
      .def_readonly("rejected_values", &RangeEstimate::rejected_values)
      .def("to_json", [](const RangeEstimate& e) { return range_estimate_to_json(e).dump(); });

  py::class_<MadSplit>(m, "MadSplit")
      .def_readonly("median", &MadSplit::median)
      .def_readonly("mad", &MadSplit::mad)
      .def_readonly("retained", &MadSplit::retained)
      .def_readonly("rejected", &MadSplit::rejected)
      .def_readonly("retained_index", &MadSplit::retained_index);

  m.def("disparity_to_depth", &disparity_to_depth, py::arg("disparity_px"), py::arg("rig"));
  m.def("depth_to_disparity", &depth_to_disparity, py::arg("depth_m"), py::arg("rig"));
  m.def(
      "depth_map_from_disparity",
      [](const Array<float>& d, const CameraRig& rig) { return grid_to_array(depth_map_from_disparity(disparity(d), rig)); },
      py::arg("disparity"), py::arg("rig"));

  m.def(
      "census_transform",
      [](const Array<std::uint8_t>& img, int radius) { return grid_to_array(census_transform(image(img), radius)); },
      py::arg("image"), py::arg("window_radius"));
  m.def(
      "block_match",
      [](const Array<std::uint8_t>& l, const Array<std::uint8_t>& r, const MatchParams& p) {
        const ImageGray left = image(l, "left");
        const ImageGray right = image(r, "right");
        DisparityMap out;
        {
          py::gil_scoped_release release;
          out = block_match(left, right, p);
        }
        return grid_to_array(out);
      },
      py::arg("left"), py::arg("right"), py::arg("params"));
  m.def(
      "sgbm",
      [](const Array<std::uint8_t>& l, const Array<std::uint8_t>& r, const MatchParams& p) {
        const ImageGray left = image(l, "left");
        const ImageGray right = image(r, "right");
        DisparityMap out;
        {
          py::gil_scoped_release release;
          out = sgbm(left, right, p);
        }
        return grid_to_array(out);
      },
      py::arg("left"), py::arg("right"), py::arg("params"));

  m.def(
      "wls_refine",
      [](const Array<float>& d, const Array<std::uint8_t>& g, const WlsParams& p) {
        return grid_to_array(wls_refine(disparity(d), image(g, "guide"), p));
      },
      py::arg("disparity"), py::arg("guide"), py::arg("params"));
  m.def(
      "fill_holes", [](const Array<float>& d) { return grid_to_array(fill_holes(disparity(d))); }, py::arg("disparity"));

  m.def(
      "_compute_depth",
      [](const Array<std::uint8_t>& l, const Array<std::uint8_t>& r, const std::string& config_json) {
        const RunConfig config = run_config(config_json);
        const ImageGray left = image(l, "left");
        const ImageGray right = image(r, "right");
        DepthResult result;
        {
          py::gil_scoped_release release;
          result = compute_depth(left, right, config);
        }
        return py::make_tuple(grid_to_array(result.disparity), grid_to_array(result.depth));
      },
      py::arg("left"), py::arg("right"), py::arg("config_json") = "");

  m.def(
      "rasterize_polygons",
      [](int w, int h, const std::vector<std::vector<std::pair<double, double>>>& polys) {
        std::vector<Polygon> polygons;
        for (const auto& poly : polys) {
          Polygon p;
          for (const auto& [x, y] : poly) p.push_back({x, y});
          polygons.push_back(std::move(p));
        }
        return grid_to_array(rasterize_polygons(w, h, polygons));
      },
      py::arg("width"), py::arg("height"), py::arg("polygons"));
  m.def(
      "mask_from_polygon_json",
      [](const std::string& text) { return grid_to_array(mask_from_polygon_json(text).bitmap); }, py::arg("text"));
  m.def(
      "sample_contour",
      [](const Array<std::uint8_t>& mk, int stride) {
        std::vector<std::pair<double, double>> out;
        for (const Point2& p : sample_contour(mask(mk), stride).points) out.emplace_back(p.x, p.y);
        return out;
      },
      py::arg("mask"), py::arg("stride"));

  m.def("mad_filter", &mad_filter, py::arg("values"), py::arg("k_mad"));
  m.def("clamped_mean", &clamped_mean, py::arg("values"));
  m.def(
      "estimate_distance",
      [](const Array<std::uint8_t>& mk, const Array<float>& z, const RangerParams& p) {
        return estimate_distance(mask(mk), depth(z), p);
      },
      py::arg("mask"), py::arg("depth"), py::arg("params"));

  m.def(
      "_generate_scene", [](const std::string& spec_json) {
        return bundle_to_dict(generate_scene(scene_spec_from_json(nlohmann::json::parse(spec_json))));
      },
      py::arg("spec_json"));
  m.def(
      "_protocol_specs",
      [](const CameraRig& rig, std::uint64_t seed, int d_max) {
        std::vector<std::string> out;
        for (const SceneSpec& s : paper_protocol_specs(rig, seed, d_max)) out.push_back(scene_spec_to_json(s).dump());
        return out;
      },
      py::arg("rig"), py::arg("seed"), py::arg("d_max") = 64);
  m.def("_default_config", [] { return config_to_json(RunConfig{}).dump(); });

  m.def("read_png", [](const std::string& path) { return grid_to_array(io::read_png(path)); }, py::arg("path"));
  m.def(
      "write_png",
      [](const std::string& path, const Array<std::uint8_t>& img) {
        const io::Bytes bytes = io::encode_png(image(img));
        io::write_file_atomic(path, bytes);
      },
      py::arg("path"), py::arg("image"));
  m.def("read_pfm", [](const std::string& path) { return grid_to_array(io::read_pfm<DepthTag>(path)); }, py::arg("path"));
  m.def(
      "write_pfm",
      [](const std::string& path, const Array<float>& plane) {
        const io::Bytes bytes = io::encode_pfm(depth(plane));
        io::write_file_atomic(path, bytes);
      },
      py::arg("path"), py::arg("plane"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
