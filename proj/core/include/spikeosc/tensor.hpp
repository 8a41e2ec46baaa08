#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spikeosc {

// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixD = Matrix<double>;

// Binary spike trains indexed (batch, time, neuron) with the step size attached.
struct SpikeTensor {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::size_t neurons = 0;
  double dt_ms = 1.0;
  std::vector<std::uint8_t> values;

  SpikeTensor() = default;
  SpikeTensor(std::size_t b, std::size_t t, std::size_t n, double dt)
      : batch(b), time(t), neurons(n), dt_ms(dt), values(b * t * n, 0) {}

  std::uint8_t& at(std::size_t b, std::size_t t, std::size_t n) noexcept {
    return values[(b * time + t) * neurons + n];
  }
  std::uint8_t at(std::size_t b, std::size_t t, std::size_t n) const noexcept {
    return values[(b * time + t) * neurons + n];
  }

  // Time x neuron raster of one batch item.
  Matrix<std::uint8_t> item(std::size_t b) const;

  std::size_t total_spikes() const noexcept;

  friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;
};

// Real-valued (batch, time, feature) array, e.g. nerve-fiber input currents.
struct Tensor3 {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::size_t features = 0;
  std::vector<double> values;

  Tensor3() = default;
  Tensor3(std::size_t b, std::size_t t, std::size_t f)
      : batch(b), time(t), features(f), values(b * t * f, 0.0) {}

  double& at(std::size_t b, std::size_t t, std::size_t f) noexcept {
    return values[(b * time + t) * features + f];
  }
  double at(std::size_t b, std::size_t t, std::size_t f) const noexcept {
    return values[(b * time + t) * features + f];
  }
};

inline Matrix<std::uint8_t> SpikeTensor::item(std::size_t b) const {
  Matrix<std::uint8_t> m(time, neurons);
  const auto* src = values.data() + b * time * neurons;
  std::copy(src, src + time * neurons, m.data().begin());
  return m;
}

inline std::size_t SpikeTensor::total_spikes() const noexcept {
  std::size_t n = 0;
  for (auto v : values) n += v;
  return n;
}

}  // namespace spikeosc
