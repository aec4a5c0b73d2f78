#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gk::nn {

// Row-major n-d value container with an optional gradient buffer of the same
// shape. Activations are NHWC; dense activations are {N, D}.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;
  std::vector<T> g;

  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatMap = Eigen::Map<Matrix>;
  using ConstMatMap = Eigen::Map<const Matrix>;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(shape), T(0));
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dim");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return v.size(); }
  int dim(int i) const { return shape.at(i); }
  bool has_grad() const { return g.size() == v.size(); }
  void ensure_grad() {
    if (!has_grad()) g.assign(v.size(), T(0));
  }
  void zero_grad() {
    if (has_grad()) std::fill(g.begin(), g.end(), T(0));
  }

  // 2D view with the leading dims folded into rows.
  MatMap mat(int rows, int cols) {
    check_view(rows, cols);
    return MatMap(v.data(), rows, cols);
  }
  ConstMatMap mat(int rows, int cols) const {
    check_view(rows, cols);
    return ConstMatMap(v.data(), rows, cols);
  }
  MatMap grad_mat(int rows, int cols) {
    ensure_grad();
    check_view(rows, cols);
    return MatMap(g.data(), rows, cols);
  }

 private:
  void check_view(int rows, int cols) const {
    if (static_cast<std::size_t>(rows) * cols != v.size())
      throw std::invalid_argument("Tensor: bad matrix view");
  }
};

}  // namespace gk::nn
