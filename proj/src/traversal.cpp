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

#include "amrpt/traversal.h"

namespace amrpt {

  std::string_view toString(TraversalMethod m)
  {
    switch (m) {
    case TraversalMethod::ABR_BVH: return "abr";
    case TraversalMethod::BRICK_KD: return "brick-kd";
    case TraversalMethod::BRICK_BVH: return "brick-bvh";
    case TraversalMethod::GRID_DDA: return "grid-dda";
    case TraversalMethod::GRID_BVH: return "grid-bvh";
    }
    return "?";
  }

  std::optional<TraversalMethod> parseTraversalMethod(std::string_view s)
  {
    for (TraversalMethod m : kAllTraversalMethods)
      if (toString(m) == s) return m;
    return std::nullopt;
  }

} // ::amrpt
