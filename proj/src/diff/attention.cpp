#include "ginet/diff/attention.hpp"

#include <Eigen/Core>

#include "ginet/error.hpp"

namespace ginet::diff {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Copies the tile's pixels of a [C,H,W] buffer into an [n,C] matrix.
template <typename T>
void gather_tile(const T* src, std::size_t channels, std::size_t width, std::size_t plane,
                 const Tile& t, MatR<T>& dst) {
  dst.resize(Eigen::Index(t.size()), Eigen::Index(channels));
  for (std::size_t c = 0; c < channels; ++c) {
    const T* base = src + c * plane;
    std::size_t i = 0;
    for (std::size_t r = 0; r < t.rows; ++r) {
      const T* row = base + (t.y0 + r) * width + t.x0;
      for (std::size_t col = 0; col < t.cols; ++col) dst(Eigen::Index(i++), Eigen::Index(c)) = row[col];
    }
  }
}

template <typename T>
void scatter_tile_add(const MatR<T>& src, std::size_t width, std::size_t plane, const Tile& t,
                      T* dst) {
  for (Eigen::Index c = 0; c < src.cols(); ++c) {
    T* base = dst + std::size_t(c) * plane;
    std::size_t i = 0;
    for (std::size_t r = 0; r < t.rows; ++r) {
      T* row = base + (t.y0 + r) * width + t.x0;
      for (std::size_t col = 0; col < t.cols; ++col) row[col] += src(Eigen::Index(i++), c);
    }
  }
}

template <typename T>
void softmax_rows_inplace(MatR<T>& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    const T peak = row.maxCoeff();
    row = (row.array() - peak).exp();
    row /= row.sum();
  }
}

template <typename T>
void check_inputs(const Tensor<T>& q, const Tensor<T>& k, std::size_t window) {
  if (q.rank() != 3 || k.shape() != q.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "window_attention: query " + to_string(q.shape()) +
                                               " and key " + to_string(k.shape()) + " must match");
  }
  if (window == 0) throw Error(ErrorCode::kInvalidArgument, "window must be positive");
}

}  // namespace

std::vector<Tile> window_tiles(std::size_t height, std::size_t width, std::size_t window) {
  std::vector<Tile> tiles;
  for (std::size_t y = 0; y < height; y += window) {
    for (std::size_t x = 0; x < width; x += window) {
      tiles.push_back({y, x, std::min(window, height - y), std::min(window, width - x)});
    }
  }
  return tiles;
}

template <typename T>
std::vector<TileWeights<T>> window_attention_weights(const Tensor<T>& q, const Tensor<T>& k,
                                                     std::size_t window) {
  check_inputs(q, k, window);
  const std::size_t d = q.dim(0), h = q.dim(1), w = q.dim(2), plane = h * w;
  std::vector<TileWeights<T>> out;
  MatR<T> qt, kt;
  for (const Tile& t : window_tiles(h, w, window)) {
    gather_tile(q.values().data(), d, w, plane, t, qt);
    gather_tile(k.values().data(), d, w, plane, t, kt);
    MatR<T> s = qt * kt.transpose();
    softmax_rows_inplace(s);
    out.push_back({t, std::vector<T>(s.data(), s.data() + s.size())});
  }
  return out;
}

template <typename T>
Tensor<T> window_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           std::size_t window) {
  check_inputs(q, k, window);
  if (v.rank() != 3 || v.dim(1) != q.dim(1) || v.dim(2) != q.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch, "window_attention: value " + to_string(v.shape()) +
                                               " is not on the query grid " + to_string(q.shape()));
  }
  const std::size_t d = q.dim(0), dv = v.dim(0), h = q.dim(1), w = q.dim(2), plane = h * w;
  const auto tiles = window_tiles(h, w, window);

  std::vector<T> out(dv * plane, T(0));
  std::vector<MatR<T>> weights;
  weights.reserve(tiles.size());
  MatR<T> qt, kt, vt;
  for (const Tile& t : tiles) {
    gather_tile(q.values().data(), d, w, plane, t, qt);
    gather_tile(k.values().data(), d, w, plane, t, kt);
    gather_tile(v.values().data(), dv, w, plane, t, vt);
    MatR<T> a = qt * kt.transpose();
    softmax_rows_inplace(a);
    MatR<T> o = a * vt;
    scatter_tile_add(o, w, plane, t, out.data());
    weights.push_back(std::move(a));
  }

  auto result = make_result<T>(Shape{dv, h, w}, std::move(out), {q, k, v}, {});
  if (result.requires_grad()) {
    result.node()->backward_fn = [tiles, weights = std::move(weights), d, dv, w,
                                  plane](Node<T>& self) {
      Node<T>& qn = *self.parents[0];
      Node<T>& kn = *self.parents[1];
      Node<T>& vn = *self.parents[2];
      T* dq = qn.requires_grad ? qn.ensure_grad().data() : nullptr;
      T* dk = kn.requires_grad ? kn.ensure_grad().data() : nullptr;
      T* dvp = vn.requires_grad ? vn.ensure_grad().data() : nullptr;
      MatR<T> qt, kt, vt, dot;
      for (std::size_t ti = 0; ti < tiles.size(); ++ti) {
        const Tile& t = tiles[ti];
        const MatR<T>& a = weights[ti];
        gather_tile(self.grad.data(), dv, w, plane, t, dot);
        if (dvp) {
          MatR<T> g = a.transpose() * dot;
          scatter_tile_add(g, w, plane, t, dvp);
        }
        if (dq || dk) {
          gather_tile(vn.value.data(), dv, w, plane, t, vt);
          MatR<T> da = dot * vt.transpose();
          // Softmax Jacobian, row by row: ds = a * (da - <da, a>).
          MatR<T> ds = a.array() * (da.array().colwise() - (da.array() * a.array()).rowwise().sum());
          if (dq) {
            gather_tile(kn.value.data(), d, w, plane, t, kt);
            MatR<T> g = ds * kt;
            scatter_tile_add(g, w, plane, t, dq);
          }
          if (dk) {
            gather_tile(qn.value.data(), d, w, plane, t, qt);
            MatR<T> g = ds.transpose() * qt;
            scatter_tile_add(g, w, plane, t, dk);
          }
        }
      }
    };
  }
  return result;
}

template Tensor<float> window_attention(const Tensor<float>&, const Tensor<float>&,
                                        const Tensor<float>&, std::size_t);
template Tensor<double> window_attention(const Tensor<double>&, const Tensor<double>&,
                                         const Tensor<double>&, std::size_t);
template std::vector<TileWeights<float>> window_attention_weights(const Tensor<float>&,
                                                                  const Tensor<float>&, std::size_t);
template std::vector<TileWeights<double>> window_attention_weights(const Tensor<double>&,
                                                                   const Tensor<double>&,
                                                                   std::size_t);

}  // namespace ginet::diff
