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

#include "pushcen/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "pushcen/errors.hpp"

namespace pushcen {

LayerLayout::LayerLayout(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  std::unordered_set<std::string> names;
  offsets_.reserve(layers_.size());
  for (const auto& spec : layers_) {
    if (spec.length == 0) {
      throw StructuralError("layer '" + spec.name + "' has zero length");
    }
    if (!names.insert(spec.name).second) {
      throw StructuralError("duplicate layer name '" + spec.name + "'");
    }
    offsets_.push_back(total_);
    total_ += spec.length;
  }
}

std::size_t LayerLayout::num_compressible() const {
  return static_cast<std::size_t>(
      std::count_if(layers_.begin(), layers_.end(), [](const LayerSpec& s) { return s.compressible; }));
}

std::size_t LayerLayout::uncompressed_total() const {
  std::size_t n = 0;
  for (const auto& s : layers_) {
    if (!s.compressible) n += s.length;
  }
  return n;
}

LayoutPtr make_layout(std::vector<LayerSpec> layers) {
  return std::make_shared<const LayerLayout>(std::move(layers));
}

bool same_layout(const LayoutPtr& a, const LayoutPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

ParamVector::ParamVector(LayoutPtr layout) : layout_(std::move(layout)) {
  if (!layout_) throw StructuralError("ParamVector requires a layout");
  values_.assign(layout_->total(), 0.0);
}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_) throw StructuralError("ParamVector requires a layout");
  if (values_.size() != layout_->total()) {
    throw StructuralError("ParamVector length " + std::to_string(values_.size()) +
                          " does not match layout total " + std::to_string(layout_->total()));
  }
  require_finite("ParamVector construction");
}

std::span<double> ParamVector::layer(std::size_t l) {
  return std::span<double>(values_).subspan(layout_->offset(l), layout_->layer(l).length);
}

std::span<const double> ParamVector::layer(std::size_t l) const {
  return std::span<const double>(values_).subspan(layout_->offset(l), layout_->layer(l).length);
}

void ParamVector::require_same_layout(const ParamVector& other) const {
  if (!same_layout(layout_, other.layout_)) {
    throw StructuralError("parameter layout mismatch");
  }
}

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ParamVector::require_finite(const char* context) const {
  if (!all_finite()) throw NumericError(std::string("non-finite parameter in ") + context);
}

ParamVector& ParamVector::scale(double a) {
  for (double& v : values_) v *= a;
  require_finite("scale");
  return *this;
}

ParamVector& ParamVector::add_scaled(double a, const ParamVector& x) {
  require_same_layout(x);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * x.values_[k];
  require_finite("add_scaled");
  return *this;
}

ParamVector& ParamVector::fill(double v) {
  std::fill(values_.begin(), values_.end(), v);
  require_finite("fill");
  return *this;
}

double ParamVector::norm_sq() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double ParamVector::norm() const { return std::sqrt(norm_sq()); }

bool ParamVector::operator==(const ParamVector& other) const {
  return same_layout(layout_, other.layout_) && values_ == other.values_;
}

PruneMask::PruneMask(LayoutPtr layout, bool keep) : layout_(std::move(layout)) {
  if (!layout_) throw StructuralError("PruneMask requires a layout");
  bits_.assign(layout_->total(), keep ? 1 : 0);
}

PruneMask::PruneMask(LayoutPtr layout, std::vector<std::uint8_t> bits)
    : layout_(std::move(layout)), bits_(std::move(bits)) {
  if (!layout_ || bits_.size() != layout_->total()) {
    throw StructuralError("PruneMask length does not match layout");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t PruneMask::count_kept() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
  x.require_same_layout(y);
  ParamVector out = y;
  out.add_scaled(a, x);
  return out;
}

void apply_mask_inplace(ParamVector& w, const PruneMask& m) {
  if (!same_layout(w.layout_ptr(), m.layout_ptr())) {
    throw StructuralError("mask layout mismatch");
  }
  auto vals = w.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (!m[k]) vals[k] = 0.0;
  }
}

ParamVector apply_mask(const ParamVector& w, const PruneMask& m) {
  ParamVector out = w;
  apply_mask_inplace(out, m);
  return out;
}

double l2_dist_sq(const ParamVector& x, const ParamVector& y) {
  x.require_same_layout(y);
  auto a = x.values();
  auto b = y.values();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace pushcen
