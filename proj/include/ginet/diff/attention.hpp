#pragma once

#include <vector>

#include "ginet/diff/tensor.hpp"

namespace ginet::diff {

// A window tile anchored at (y0, x0). Edge tiles may be smaller than the
// window; the missing positions are treated as masked keys (score -inf).
struct Tile {
  std::size_t y0 = 0, x0 = 0;
  std::size_t rows = 0, cols = 0;
  std::size_t size() const { return rows * cols; }
};

// Non-overlapping window x window tiles in row-major order.
std::vector<Tile> window_tiles(std::size_t height, std::size_t width, std::size_t window);

// Non-local filtering restricted to window tiles:
//   w_ij = exp(<q_i, k_j>) / sum_j' exp(<q_i, k_j'>),   out_i = sum_j w_ij v_j
// with i, j ranging over the pixels of one tile.
//   q, k [D,H,W], v [Dv,H,W] -> [Dv,H,W]
template <typename T>
Tensor<T> window_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           std::size_t window);

template <typename T>
struct TileWeights {
  Tile tile;
  std::vector<T> weights;  // size() x size(), row-major; row i is query pixel i
};

// The attention matrices window_attention would use (no graph).
template <typename T>
std::vector<TileWeights<T>> window_attention_weights(const Tensor<T>& q, const Tensor<T>& k,
                                                     std::size_t window);

}  // namespace ginet::diff
