#pragma once

#include <cstdint>

#include "ginet/dataset.hpp"
#include "ginet/raster.hpp"

namespace ginet::synth {

struct Scene {
  raster::BandStack hr10;  // B2, B3, B4, B8 at 10m, size x size
  raster::BandStack lr20;  // the six 20m bands, size/2 x size/2
};

// Procedural scene: warped Voronoi patches of a few materials, each with its
// own ten-band signature, modulated by band-correlated sinusoidal texture.
// The 20m bands are 2x2 means of the same scene rendered on the 10m grid.
// `size` must be even.
Scene make_scene(std::uint32_t size, std::uint64_t seed,
                 dataset::Landscape landscape = dataset::Landscape::kMixed);

}  // namespace ginet::synth
