#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace peel {

/// Row-major raster; row 0 is the top image row.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& at(int x, int y) {
    assert(x >= 0 && y >= 0 && x < width_ && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& at(int x, int y) const {
    assert(x >= 0 && y >= 0 && x < width_ && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace peel
