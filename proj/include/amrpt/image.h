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

#pragma once

#include "amrpt/math.h"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace amrpt {

  /*! linear RGB image, row-major, top row first */
  struct Image {
    int width = 0, height = 0;
    std::vector<vec3d> pixels;
  };

  /*! 8-bit quantization: clamp to [0,1], scale by 255, round */
  std::vector<uint8_t> quantize(const Image &image);

  /*! binary PPM (P6, 8-bit) */
  std::string encodePPM(const Image &image);
  void writePPM(const std::filesystem::path &path, const Image &image);

  /*! 8-bit RGB PNG */
  std::string encodePNG(const Image &image);
  void writePNG(const std::filesystem::path &path, const Image &image);

  struct ImageDiff {
    double mae = 0.0;
    double rmse = 0.0;
    double maxAbs = 0.0;
  };

  /*! channel-wise statistics; throws std::invalid_argument on size mismatch */
  ImageDiff imageCompare(const Image &a, const Image &b);

} // ::amrpt
