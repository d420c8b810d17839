// ======================================================================== //
// Copyright 2026 The amrpt Authors                                         //
//                                                                          //
// Licensed under the Apache License, Version 2.0 (the "License");          //
// you may not use this file except in compliance with the License.         //
// You may obtain a copy of the License at                                  //
//                                                                          //
//     http://www.apache.org/licenses/LICENSE-2.0                           //
//                                                                          //
// Unless required by applicable law or agreed to in writing, software      //
// distributed under the License is distributed on an "AS IS" BASIS,        //
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. //
// See the License for the specific language governing permissions and      //
// limitations under the License.                                           //
// ======================================================================== //

#include "amrpt/bench.h"
#include "amrpt/image.h"
#include "amrpt/ingest.h"
#include "amrpt/scene.h"
#include "amrpt/transport.h"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace amrpt;

namespace {

  template <typename E>
  E parseEnum(std::optional<E> (*parse)(std::string_view), const std::string &text, const char *what)
  {
    const auto v = parse(text);
    if (!v) throw py::value_error(std::string("unknown ") + what + " '" + text + "'");
    return *v;
  }

  py::array_t<double> imageArray(const std::vector<vec3d> &pixels, int width, int height)
  {
    py::array_t<double> out({height, width, 3});
    auto view = out.mutable_unchecked<3>();
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (int c = 0; c < 3; ++c) view(y, x, c) = pixels[size_t(y) * width + x][c];
    return out;
  }

  py::dict statsDict(const RayStats &s)
  {
    py::dict d;
    d["rays"] = s.rays;
    d["partitions_traversed"] = s.partitionsTraversed;
    d["volume_samples"] = s.volumeSamples;
    d["null_collisions"] = s.nullCollisions;
    d["real_collisions"] = s.realCollisions;
    d["mean_partitions_per_ray"] = s.meanPartitionsPerRay();
    d["mean_volume_samples"] = s.meanVolumeSamples();
    d["mean_null_collisions"] = s.meanNullCollisions();
    d["partitions_per_ray_histogram"] = std::vector<uint64_t>(s.partitionsPerRay.bins.begin(),
                                                              s.partitionsPerRay.bins.end());
    return d;
  }

  py::dict countersDict(const BuildCounters &c)
  {
    py::dict d;
    d["bricks"] = c.bricks;
    d["abrs"] = c.abrs;
    d["brick_ranges"] = c.brickRanges;
    d["grid"] = c.grid;
    d["kd_tree"] = c.kdTree;
    d["point_bvhs"] = c.pointBvhs;
    d["culled_bvhs"] = c.culledBvhs;
    d["reclassifications"] = c.reclassifications;
    d["geometry_total"] = c.geometryTotal();
    return d;
  }

  py::tuple bounds(const box3d &b)
  {
    return py::make_tuple(py::make_tuple(b.lower.x, b.lower.y, b.lower.z),
                          py::make_tuple(b.upper.x, b.upper.y, b.upper.z));
  }

  CellSet cellsFromArrays(py::array_t<int32_t, py::array::c_style | py::array::forcecast> cells,
                          py::array_t<float, py::array::c_style | py::array::forcecast> scalars)
  {
    if (cells.ndim() != 2 || cells.shape(1) != 4) throw py::value_error("cells: expected an (N, 4) array");
    if (scalars.ndim() != 1 || scalars.shape(0) != cells.shape(0))
      throw py::value_error("scalars: expected N values");
    auto c = cells.unchecked<2>();
    auto s = scalars.unchecked<1>();
    std::vector<Cell> list(size_t(cells.shape(0)));
    for (py::ssize_t i = 0; i < cells.shape(0); ++i)
      list[size_t(i)] = Cell{{c(i, 0), c(i, 1), c(i, 2)}, c(i, 3), s(i)};
    CellSet set = CellSet::fromCells(std::move(list));
    validateCellSet(set);
    return set;
  }

} // namespace

PYBIND11_MODULE(_amrpt, m)
{
  m.doc() = "path tracing of cell-centric AMR volumes";

  py::register_exception<InvalidCellSet>(m, "InvalidCellSet", PyExc_ValueError);
  py::register_exception<IngestError>(m, "IngestError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_RuntimeError);
  py::register_exception<MajorantViolation>(m, "MajorantViolation", PyExc_RuntimeError);

  py::class_<CellSet, std::shared_ptr<CellSet>>(m, "CellSet")
    .def(py::init(&cellsFromArrays), py::arg("cells"), py::arg("scalars"),
         "cells: (N, 4) int array of x, y, z, level; scalars: N floats")
    .def("__len__", [](const CellSet &s) { return s.cells.size(); })
    .def_readonly("num_levels", &CellSet::numLevels)
    .def_property_readonly("world_bounds", [](const CellSet &s) { return bounds(s.worldBounds); })
    .def_property_readonly("cells",
                           [](const CellSet &s) {
                             py::array_t<int32_t> out({py::ssize_t(s.cells.size()), py::ssize_t(4)});
                             auto v = out.mutable_unchecked<2>();
                             for (size_t i = 0; i < s.cells.size(); ++i) {
                               const Cell &c = s.cells[i];
                               v(i, 0) = c.lower.x;
                               v(i, 1) = c.lower.y;
                               v(i, 2) = c.lower.z;
                               v(i, 3) = c.level;
                             }
                             return out;
                           })
    .def_property_readonly("scalars", [](const CellSet &s) {
      py::array_t<float> out(py::ssize_t(s.cells.size()));
      auto v = out.mutable_unchecked<1>();
      for (size_t i = 0; i < s.cells.size(); ++i) v(i) = s.cells[i].scalar;
      return out;
    });

  m.def(
    "generate",
    [](const std::string &kind, uint64_t seed, int refineLevels, double threshold, int rootCells) {
      SyntheticSpec spec;
      spec.kind = parseEnum(&parseSyntheticKind, kind, "synthetic kind");
      spec.seed = seed;
      spec.refineLevels = refineLevels;
      spec.gradientThreshold = threshold;
      spec.rootCells = rootCells;
      return std::make_shared<CellSet>(generate(spec));
    },
    py::arg("kind"), py::arg("seed") = 0, py::arg("refine_levels") = 3, py::arg("gradient_threshold") = 0.1,
    py::arg("root_cells") = 4, "kind: sphere-shells | turbulence | teapot-in-stadium");

  m.def(
    "load_cells",
    [](const std::filesystem::path &c, const std::filesystem::path &s) {
      return std::make_shared<CellSet>(loadCells(c, s));
    },
    py::arg("cells_path"), py::arg("scalars_path"));
  m.def(
    "save_cells", [](const std::filesystem::path &c, const std::filesystem::path &s, const CellSet &set) {
      saveCells(c, s, set);
    },
    py::arg("cells_path"), py::arg("scalars_path"), py::arg("cell_set"));

  m.def(
    "normalize_transfer_function",
    [](const std::string &text) { return serializeTransferFunction(parseTransferFunction(text)); },
    py::arg("document"), "validates a TF document and returns its canonical form");
  m.def(
    "normalize_render_config",
    [](const std::string &text) { return serializeRenderConfig(parseRenderConfig(text)); },
    py::arg("document"), "validates a render-config document and returns its canonical form");

  m.def("traversal_methods", [] {
    std::vector<std::string> out;
    for (auto v : kAllTraversalMethods) out.emplace_back(toString(v));
    return out;
  });
  m.def("sampler_kinds", [] {
    std::vector<std::string> out;
    for (auto v : kAllSamplerKinds) out.emplace_back(toString(v));
    return out;
  });

  py::class_<Scene>(m, "Scene")
    .def(py::init([](const CellSet &cells, const std::string &tf, std::array<int, 3> dims) {
           return std::make_unique<Scene>(cells, parseTransferFunction(tf), vec3i(dims[0], dims[1], dims[2]));
         }),
         py::arg("cells"), py::arg("transfer_function"), py::arg("grid_dims") = std::array<int, 3>{16, 16, 16})
    .def("set_transfer_function",
         [](Scene &s, const std::string &tf) { s.setTransferFunction(parseTransferFunction(tf)); })
    .def("set_grid_dims",
         [](Scene &s, std::array<int, 3> dims) { s.setGridDims(vec3i(dims[0], dims[1], dims[2])); })
    .def_property_readonly("counters", [](const Scene &s) { return countersDict(s.counters()); })
    .def_property_readonly("num_bricks", [](const Scene &s) { return s.bricks().size(); })
    .def_property_readonly("num_abrs", [](const Scene &s) { return s.abrs().size(); })
    .def_property_readonly("grid_dims",
                           [](const Scene &s) {
                             const vec3i d = s.grid().dims;
                             return py::make_tuple(d.x, d.y, d.z);
                           })
    .def_property_readonly("medium_bounds", [](const Scene &s) { return bounds(s.mediumBounds()); })
    .def(
      "majorants",
      [](Scene &s, const std::string &method) {
        const TraversalMethod tm = parseEnum(&parseTraversalMethod, method, "traversal");
        s.prepare(tm);
        const auto span = s.majorants(tm);
        return std::vector<float>(span.begin(), span.end());
      },
      py::arg("traversal"))
    .def(
      "sample",
      [](const Scene &s, std::array<double, 3> x, const std::string &sampler) {
        const Sample v = s.sample(parseEnum(&parseSamplerKind, sampler, "sampler"), vec3d(x[0], x[1], x[2]));
        py::dict d;
        d["value"] = v.value;
        d["extinction"] = v.extinction;
        d["albedo"] = py::make_tuple(v.albedo.x, v.albedo.y, v.albedo.z);
        return d;
      },
      py::arg("x"), py::arg("sampler") = "ext-brick")
    .def(
      "transmittance",
      [](const Scene &s, std::array<double, 3> o, std::array<double, 3> d, double tmax, double step,
         const std::string &sampler) {
        const Ray ray{vec3d(o[0], o[1], o[2]), vec3d(d[0], d[1], d[2]), 0.0, tmax};
        return quadratureTransmittance(s, parseEnum(&parseSamplerKind, sampler, "sampler"), ray, step)
          .transmittance;
      },
      py::arg("origin"), py::arg("direction"), py::arg("tmax") = std::numeric_limits<double>::infinity(),
      py::arg("step") = 0.01, py::arg("sampler") = "ext-brick",
      "deterministic quadrature estimate of the transmittance along a ray")
    .def(
      "render",
      [](Scene &s, const std::string &config, int threads) {
        const RenderConfig cfg = parseRenderConfig(config);
        Accumulator accum;
        FrameResult result;
        {
          py::gil_scoped_release release;
          result = renderImage(s, cfg, accum, threads);
        }
        py::dict out;
        out["image"] = imageArray(accum.mean(), accum.width, accum.height);
        out["standard_error"] = imageArray(accum.standardError(), accum.width, accum.height);
        out["stats"] = statsDict(result.stats);
        out["seconds"] = result.seconds;
        out["camera_samples"] = result.cameraSamples;
        return out;
      },
      py::arg("config"), py::arg("threads") = 0);

  m.def(
    "encode_png",
    [](py::array_t<double, py::array::c_style | py::array::forcecast> rgb) {
      if (rgb.ndim() != 3 || rgb.shape(2) != 3) throw py::value_error("expected an (H, W, 3) array");
      Image image;
      image.height = int(rgb.shape(0));
      image.width = int(rgb.shape(1));
      auto v = rgb.unchecked<3>();
      image.pixels.resize(size_t(image.width) * image.height);
      for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
          image.pixels[size_t(y) * image.width + x] = {v(y, x, 0), v(y, x, 1), v(y, x, 2)};
      return py::bytes(encodePNG(image));
    },
    py::arg("rgb"));
}
