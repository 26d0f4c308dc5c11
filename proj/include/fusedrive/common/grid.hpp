#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fusedrive/common/errors.hpp"

namespace fusedrive {

// Dense channels x rows x cols array, row-major within a channel.
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int channels, int rows, int cols, T fill = T{})
      : channels_(channels), rows_(rows), cols_(cols) {
    if (channels < 0 || rows < 0 || cols < 0) {
      throw InvalidInput("Grid3: negative dimension");
    }
    data_.assign(static_cast<std::size_t>(channels) * rows * cols, fill);
  }

  int channels() const { return channels_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(rows_) * cols_; }

  T& at(int c, int r, int x) { return data_[index(c, r, x)]; }
  const T& at(int c, int r, int x) const { return data_[index(c, r, x)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Grid3& other) const {
    return channels_ == other.channels_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Grid3&) const = default;

 private:
  std::size_t index(int c, int r, int x) const {
    return (static_cast<std::size_t>(c) * rows_ + r) * cols_ + x;
  }

  int channels_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Single-plane rows x cols array.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw InvalidInput("Grid2: negative dimension");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Grid2&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

}  // namespace fusedrive
