// Copyright 2026 The knitgrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "knitgrid/error.hpp"

namespace knitgrid {

struct Index {
  std::string name;
  std::size_t dim = 0;

  friend bool operator==(const Index&, const Index&) = default;
};

enum class TensorRole {
  GateCoefficient,  // gate-cut QPD coefficients, subject to QPD sampling
  WireCoefficient,  // wire-cut coefficients, never sampled
  Result,           // evaluated quantum tensor
  Intermediate,
};

inline bool is_coefficient(TensorRole r) {
  return r == TensorRole::GateCoefficient || r == TensorRole::WireCoefficient;
}

/// Dense real tensor over named indices, row-major in index order.
struct Tensor {
  std::string name;
  std::vector<Index> indices;
  std::vector<double> data;
  TensorRole role = TensorRole::Result;

  std::size_t volume() const {
    std::size_t v = 1;
    for (const Index& i : indices) v *= i.dim;
    return v;
  }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](double x) { return x != 0.0; }));
  }

  void validate() const {
    if (data.size() != volume())
      throw ValidationError("tensor '" + name + "': " + std::to_string(data.size()) +
                            " entries for volume " + std::to_string(volume()));
    for (double x : data)
      if (!std::isfinite(x)) throw ValidationError("tensor '" + name + "' has a non-finite entry");
  }

  std::optional<std::size_t> find(const std::string& index_name) const {
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (indices[k].name == index_name) return k;
    return std::nullopt;
  }
};

/// Index metadata of a tensor. `nonzeros` is set for coefficient tensors whose
/// zero pattern is structural; multiplications against those zeros are not
/// counted.
struct TensorShape {
  std::vector<Index> indices;
  std::optional<std::size_t> nonzeros;
};

inline TensorShape shape_of(const Tensor& t) {
  TensorShape s{t.indices, std::nullopt};
  if (is_coefficient(t.role)) s.nonzeros = t.nonzeros();
  return s;
}

namespace detail {

inline bool has_index(const std::vector<Index>& v, const std::string& name) {
  return std::any_of(v.begin(), v.end(), [&](const Index& i) { return i.name == name; });
}

/// Indices of a pairwise contraction result: free indices of a, then of b.
inline std::vector<Index> merged_indices(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::vector<Index> out;
  for (const Index& i : a)
    if (!has_index(b, i.name)) out.push_back(i);
  for (const Index& i : b)
    if (!has_index(a, i.name)) out.push_back(i);
  return out;
}

}  // namespace detail

/// Dense cost of a pairwise contraction: product of the dimensions of the
/// union of both operands' indices.
inline double pair_cost(const std::vector<Index>& a, const std::vector<Index>& b) {
  double c = 1.0;
  for (const Index& i : a) c *= static_cast<double>(i.dim);
  for (const Index& i : b)
    if (!detail::has_index(a, i.name)) c *= static_cast<double>(i.dim);
  return c;
}

/// Multiplications for a pairwise contraction when structurally sparse
/// operands are iterated over their nonzeros.
inline double pair_flops(const TensorShape& a, const TensorShape& b) {
  double best = pair_cost(a.indices, b.indices);
  auto free_volume = [](const std::vector<Index>& of, const std::vector<Index>& other) {
    double v = 1.0;
    for (const Index& i : of)
      if (!detail::has_index(other, i.name)) v *= static_cast<double>(i.dim);
    return v;
  };
  if (a.nonzeros) best = std::min(best, static_cast<double>(*a.nonzeros) * free_volume(b.indices, a.indices));
  if (b.nonzeros) best = std::min(best, static_cast<double>(*b.nonzeros) * free_volume(a.indices, b.indices));
  return best;
}

/// Sums over the indices shared by a and b.
inline Tensor contract_pair(const Tensor& a, const Tensor& b) {
  std::vector<std::size_t> a_free, a_shared, b_free, b_shared;
  for (std::size_t i = 0; i < a.indices.size(); ++i) {
    auto k = b.find(a.indices[i].name);
    if (!k) {
      a_free.push_back(i);
      continue;
    }
    if (b.indices[*k].dim != a.indices[i].dim)
      throw ValidationError("dimension mismatch on index '" + a.indices[i].name + "': " +
                            std::to_string(a.indices[i].dim) + " vs " +
                            std::to_string(b.indices[*k].dim));
    a_shared.push_back(i);
    b_shared.push_back(*k);
  }
  for (std::size_t k = 0; k < b.indices.size(); ++k)
    if (!a.find(b.indices[k].name)) b_free.push_back(k);

  auto strides = [](const std::vector<Index>& idx) {
    std::vector<std::size_t> s(idx.size(), 1);
    for (std::size_t k = idx.size(); k-- > 1;) s[k - 1] = s[k] * idx[k].dim;
    return s;
  };
  const auto sa = strides(a.indices);
  const auto sb = strides(b.indices);
  // Offsets of every combination of a list of axes, row-major.
  auto offsets = [](const std::vector<Index>& idx, const std::vector<std::size_t>& st,
                    const std::vector<std::size_t>& axes) {
    std::vector<std::size_t> out{0};
    for (std::size_t ax : axes) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * idx[ax].dim);
      for (std::size_t base : out)
        for (std::size_t c = 0; c < idx[ax].dim; ++c) next.push_back(base + c * st[ax]);
      out = std::move(next);
    }
    return out;
  };
  const auto rows = offsets(a.indices, sa, a_free);
  const auto a_sum = offsets(a.indices, sa, a_shared);
  const auto b_sum = offsets(b.indices, sb, b_shared);
  const auto cols = offsets(b.indices, sb, b_free);

  Tensor out;
  out.role = TensorRole::Intermediate;
  for (std::size_t i : a_free) out.indices.push_back(a.indices[i]);
  for (std::size_t k : b_free) out.indices.push_back(b.indices[k]);
  out.data.assign(rows.size() * cols.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double* dst = out.data.data() + r * cols.size();
    for (std::size_t s = 0; s < a_sum.size(); ++s) {
      const double av = a.data[rows[r] + a_sum[s]];
      if (av == 0.0) continue;
      for (std::size_t c = 0; c < cols.size(); ++c) dst[c] += av * b.data[b_sum[s] + cols[c]];
    }
  }
  return out;
}

}  // namespace knitgrid
