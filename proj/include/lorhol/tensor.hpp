#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

namespace lorhol {

namespace detail {
template <int R, std::ptrdiff_t... Ds>
struct Sizes4 : Sizes4<R - 1, 4, Ds...> {};
template <std::ptrdiff_t... Ds>
struct Sizes4<0, Ds...> {
  using type = Eigen::Sizes<Ds...>;
};
}  // namespace detail

// Rank-R tensor over a 4-dimensional index space, index order as written (t(a, b, c, ...)).
template <typename Scalar, int Rank>
using Tensor = Eigen::TensorFixedSize<Scalar, typename detail::Sizes4<Rank>::type>;

using Tensor3d = Tensor<double, 3>;
using Tensor4d = Tensor<double, 4>;
using Tensor5d = Tensor<double, 5>;
using Tensor6d = Tensor<double, 6>;

template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Eigen::Matrix4d;
using Eigen::Vector4d;
using Matrix6d = Matrix6<double>;
using Vector6d = Vector6<double>;

template <typename Scalar, int Rank>
Scalar max_abs(const Tensor<Scalar, Rank>& t) {
  Scalar m = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t.data()[i]));
  return m;
}

// Ordered multi-index (i1, ..., ik) of partial derivatives, k <= 6.
struct MultiIndex {
  int size = 0;
  std::array<int, 6> idx{};

  MultiIndex with(int i) const {
    MultiIndex m = *this;
    m.idx[static_cast<std::size_t>(m.size++)] = i;
    return m;
  }
  int operator[](int k) const { return idx[static_cast<std::size_t>(k)]; }
};

// All partial derivatives of a quantity up to a fixed order, stored per ordered multi-index
// (redundant under commuting partials, but it keeps Leibniz products uniform).
template <typename Value>
class Jet {
 public:
  Jet() = default;
  Jet(int order, const Value& zero) : order_(order), data_(count(order), zero) {}

  static std::size_t count(int order) {
    std::size_t n = 0, p = 1;
    for (int k = 0; k <= order; ++k, p *= 4) n += p;
    return n;
  }

  static std::size_t offset(const MultiIndex& m) {
    std::size_t base = 0, p = 1;
    for (int k = 0; k < m.size; ++k, p *= 4) base += p;
    std::size_t code = 0;
    for (int k = m.size - 1; k >= 0; --k) code = code * 4 + static_cast<std::size_t>(m[k]);
    return base + code;
  }

  int order() const { return order_; }
  Value& operator[](const MultiIndex& m) { return data_[offset(m)]; }
  const Value& operator[](const MultiIndex& m) const { return data_[offset(m)]; }
  Value& value() { return data_[0]; }
  const Value& value() const { return data_[0]; }

 private:
  int order_ = -1;
  std::vector<Value> data_;
};

template <typename Fn>
void for_each_multi_index(int order, Fn&& fn) {
  for (int k = 0; k <= order; ++k) {
    int total = 1;
    for (int j = 0; j < k; ++j) total *= 4;
    for (int code = 0; code < total; ++code) {
      MultiIndex m;
      m.size = k;
      int c = code;
      for (int j = 0; j < k; ++j, c /= 4) m.idx[static_cast<std::size_t>(j)] = c % 4;
      fn(m);
    }
  }
}

// For every multi-index S up to out.order(): acc(out[S], f[T], g[S\T]) over all 2^|S|
// splits of the positions of S.
template <typename A, typename B, typename Out, typename Acc>
void leibniz_accumulate(const Jet<A>& f, const Jet<B>& g, Jet<Out>& out, Acc&& acc) {
  for_each_multi_index(out.order(), [&](const MultiIndex& s) {
    Out& target = out[s];
    for (int mask = 0; mask < (1 << s.size); ++mask) {
      MultiIndex t, u;
      for (int k = 0; k < s.size; ++k) {
        if (mask & (1 << k))
          t = t.with(s[k]);
        else
          u = u.with(s[k]);
      }
      acc(target, f[t], g[u]);
    }
  });
}

}  // namespace lorhol
