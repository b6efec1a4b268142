/**
 * Copyright 2026 The pushcen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PUSHCEN_PARAMS_HPP
#define PUSHCEN_PARAMS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pushcen {

struct LayerSpec {
  std::string name;
  std::size_t length = 0;
  // Compressible layers are WCP-encoded; the rest (biases) travel raw.
  bool compressible = true;

  bool operator==(const LayerSpec&) const = default;
};

// Ordered, named partition of a flat parameter vector.
class LayerLayout {
 public:
  LayerLayout() = default;
  explicit LayerLayout(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(std::size_t l) const { return layers_.at(l); }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t total() const { return total_; }
  std::size_t offset(std::size_t l) const { return offsets_.at(l); }

  std::size_t num_compressible() const;
  // Sum of lengths over non-compressible layers.
  std::size_t uncompressed_total() const;

  bool operator==(const LayerLayout& other) const { return layers_ == other.layers_; }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const LayerLayout>;

LayoutPtr make_layout(std::vector<LayerSpec> layers);

bool same_layout(const LayoutPtr& a, const LayoutPtr& b);

// Flat float64 model state tagged with its layout. Binary operations check
// that both operands share a layout and throw StructuralError otherwise.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(LayoutPtr layout);
  ParamVector(LayoutPtr layout, std::vector<double> values);

  const LayerLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> layer(std::size_t l);
  std::span<const double> layer(std::size_t l) const;

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  void require_same_layout(const ParamVector& other) const;
  void require_finite(const char* context) const;
  bool all_finite() const;

  ParamVector& scale(double a);
  // this += a * x
  ParamVector& add_scaled(double a, const ParamVector& x);
  ParamVector& fill(double v);

  double norm_sq() const;
  double norm() const;

  bool operator==(const ParamVector& other) const;

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

class PruneMask {
 public:
  PruneMask() = default;
  PruneMask(LayoutPtr layout, bool keep);
  PruneMask(LayoutPtr layout, std::vector<std::uint8_t> bits);

  const LayerLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t k) const { return bits_[k] != 0; }
  void set(std::size_t k, bool keep) { bits_[k] = keep ? 1 : 0; }
  std::size_t count_kept() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const PruneMask& other) const = default;

 private:
  LayoutPtr layout_;
  std::vector<std::uint8_t> bits_;
};

// a*x + y; inputs are not modified.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);

// Zeroes every entry whose mask bit is clear.
ParamVector apply_mask(const ParamVector& w, const PruneMask& m);
void apply_mask_inplace(ParamVector& w, const PruneMask& m);

double l2_dist_sq(const ParamVector& x, const ParamVector& y);

}  // namespace pushcen

#endif  // PUSHCEN_PARAMS_HPP
