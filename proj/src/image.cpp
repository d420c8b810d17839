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

#include "amrpt/image.h"

#include <png.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace amrpt {

  std::vector<uint8_t> quantize(const Image &image)
  {
    std::vector<uint8_t> out(image.pixels.size() * 3);
    for (size_t i = 0; i < image.pixels.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image.pixels[i][c], 0.0, 1.0);
        out[3 * i + c] = uint8_t(std::lround(v * 255.0));
      }
    return out;
  }

  std::string encodePPM(const Image &image)
  {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    const auto bytes = quantize(image);
    out.append(reinterpret_cast<const char *>(bytes.data()), bytes.size());
    return out;
  }

  namespace {
    void writeFile(const std::filesystem::path &path, const std::string &bytes)
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
      out.write(bytes.data(), std::streamsize(bytes.size()));
    }

    void appendToString(png_structp png, png_bytep data, png_size_t length)
    {
      auto *out = static_cast<std::string *>(png_get_io_ptr(png));
      out->append(reinterpret_cast<const char *>(data), length);
    }
  } // namespace

  void writePPM(const std::filesystem::path &path, const Image &image) { writeFile(path, encodePPM(image)); }

  std::string encodePNG(const Image &image)
  {
    std::string out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, info ? &info : nullptr);
      throw std::runtime_error("png: encoding failed");
    }
    auto bytes = quantize(image);
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = bytes.data() + size_t(y) * image.width * 3;
    png_set_write_fn(png, &out, appendToString, nullptr);
    png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
  }

  void writePNG(const std::filesystem::path &path, const Image &image) { writeFile(path, encodePNG(image)); }

  ImageDiff imageCompare(const Image &a, const Image &b)
  {
    if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size())
      throw std::invalid_argument("imageCompare: images differ in size");
    ImageDiff d;
    if (a.pixels.empty()) return d;
    double sumAbs = 0.0, sumSq = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        const double e = std::abs(a.pixels[i][c] - b.pixels[i][c]);
        sumAbs += e;
        sumSq += e * e;
        d.maxAbs = std::max(d.maxAbs, e);
      }
    const double n = 3.0 * double(a.pixels.size());
    d.mae = sumAbs / n;
    d.rmse = std::sqrt(sumSq / n);
    return d;
  }

} // ::amrpt
