#pragma once

#include <cstddef>
#include <vector>

namespace mvf {

// Planar channels x height x width.
template <typename T>
struct BasicTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  BasicTensor() = default;
  BasicTensor(int c, int h, int w, T fill = T{})
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  T* plane(int c) { return data.data() + static_cast<std::size_t>(c) * plane_size(); }
  const T* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * plane_size(); }
  T& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  const T& at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

  bool operator==(const BasicTensor&) const = default;
};

using Tensor = BasicTensor<float>;

}  // namespace mvf
