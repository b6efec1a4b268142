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

#include "pushcen/wcp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pushcen/errors.hpp"
#include "pushcen/rng.hpp"

namespace pushcen {

namespace {

void check_value_bits(int bits) {
  if (bits != 16 && bits != 32 && bits != 64) {
    throw ConfigError("value bit width must be 16, 32 or 64, got " + std::to_string(bits));
  }
}

void check_clusters(int clusters) {
  if (clusters < 2 || clusters > (1 << 16)) {
    throw ConfigError("cluster count must be in [2, 65536], got " + std::to_string(clusters));
  }
}

// LSB-first bit stream.
class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t value, int bits) {
    for (int b = 0; b < bits; ++b) {
      if (used_ == 0) out_.push_back(0);
      if ((value >> b) & 1U) out_.back() |= static_cast<std::uint8_t>(1U << used_);
      used_ = (used_ + 1) & 7;
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
  int used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t get(int bits) {
    std::uint64_t v = 0;
    for (int b = 0; b < bits; ++b) {
      const std::size_t byte = pos_ >> 3;
      if (byte >= in_.size()) throw CorruptPayload("payload truncated");
      if ((in_[byte] >> (pos_ & 7)) & 1U) v |= (std::uint64_t{1} << b);
      ++pos_;
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptPayload("header truncated");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{in[pos + i]} << (8 * i);
  pos += sizeof(T);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

std::uint64_t encode_value(double v, int bits) {
  switch (bits) {
    case 16:
      return float_to_half(static_cast<float>(v));
    case 32:
      return std::bit_cast<std::uint32_t>(static_cast<float>(v));
    default:
      return std::bit_cast<std::uint64_t>(v);
  }
}

double decode_value(std::uint64_t raw, int bits) {
  switch (bits) {
    case 16:
      return half_to_float(static_cast<std::uint16_t>(raw));
    case 32:
      return std::bit_cast<float>(static_cast<std::uint32_t>(raw));
    default:
      return std::bit_cast<double>(raw);
  }
}

// Distinct centroid values ascending, each tagged with the lowest slot
// holding it. Nearest lookup is then a binary search.
struct SortedCentroids {
  std::vector<double> values;
  std::vector<std::uint32_t> slots;

  explicit SortedCentroids(std::span<const double> centroids) {
    std::vector<std::uint32_t> order(centroids.size());
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return centroids[a] < centroids[b] || (centroids[a] == centroids[b] && a < b);
    });
    for (std::uint32_t j : order) {
      if (!values.empty() && values.back() == centroids[j]) continue;
      values.push_back(centroids[j]);
      slots.push_back(j);
    }
  }

  std::uint32_t nearest(double x) const {
    const auto it = std::lower_bound(values.begin(), values.end(), x);
    const std::size_t pos = static_cast<std::size_t>(it - values.begin());
    if (pos == 0) return slots.front();
    if (pos == values.size()) return slots.back();
    const double left = x - values[pos - 1];
    const double right = values[pos] - x;
    if (left < right) return slots[pos - 1];
    if (right < left) return slots[pos];
    return std::min(slots[pos - 1], slots[pos]);
  }
};

}  // namespace

std::uint16_t float_to_half(float f) {
  const std::uint32_t x = std::bit_cast<std::uint32_t>(f);
  const std::uint32_t sign = (x >> 16) & 0x8000U;
  std::uint32_t mant = x & 0x7FFFFFU;
  const std::int32_t exp = static_cast<std::int32_t>((x >> 23) & 0xFFU);
  if (exp == 0xFF) return static_cast<std::uint16_t>(sign | 0x7C00U | (mant ? 0x200U : 0U));
  const std::int32_t e = exp - 127 + 15;
  if (e >= 0x1F) return static_cast<std::uint16_t>(sign | 0x7C00U);
  if (e <= 0) {
    if (e < -10) return static_cast<std::uint16_t>(sign);
    mant |= 0x800000U;
    const int shift = 14 - e;
    std::uint32_t half_mant = mant >> shift;
    const std::uint32_t rem = mant & ((1U << shift) - 1U);
    const std::uint32_t halfway = 1U << (shift - 1);
    if (rem > halfway || (rem == halfway && (half_mant & 1U))) ++half_mant;
    return static_cast<std::uint16_t>(sign | half_mant);
  }
  std::uint32_t half = sign | (static_cast<std::uint32_t>(e) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1FFFU;
  if (rem > 0x1000U || (rem == 0x1000U && (half & 1U))) ++half;
  return static_cast<std::uint16_t>(half);
}

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000U) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1FU;
  const std::uint32_t mant = h & 0x3FFU;
  if (exp == 0) {
    const float mag = std::ldexp(static_cast<float>(mant), -24);
    return sign ? -mag : mag;
  }
  if (exp == 0x1F) return std::bit_cast<float>(sign | 0x7F800000U | (mant << 13));
  return std::bit_cast<float>(sign | ((exp + 112U) << 23) | (mant << 13));
}

double round_to_bits(double v, int bits) {
  check_value_bits(bits);
  double r = v;
  if (bits == 32) {
    r = static_cast<double>(static_cast<float>(v));
  } else if (bits == 16) {
    r = half_to_float(float_to_half(static_cast<float>(v)));
  }
  if (!std::isfinite(r)) throw NumericError("value overflows the " + std::to_string(bits) + "-bit wire format");
  return r == 0.0 ? 0.0 : r;
}

int index_bits(int clusters) {
  check_clusters(clusters);
  return std::bit_width(static_cast<unsigned>(clusters - 1));
}

CentroidTable CentroidTable::zeros(std::size_t num_layers, int clusters) {
  CentroidTable t;
  t.layers.assign(num_layers, std::vector<double>(static_cast<std::size_t>(clusters), 0.0));
  return t;
}

bool CentroidTable::has_nonzero(std::size_t layer) const {
  if (layer >= layers.size()) return false;
  return std::any_of(layers[layer].begin(), layers[layer].end(), [](double v) { return v != 0.0; });
}

std::vector<std::uint32_t> assign_nearest(std::span<const double> points, std::span<const double> centroids) {
  const SortedCentroids sorted(centroids);
  std::vector<std::uint32_t> out(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) out[k] = sorted.nearest(points[k]);
  return out;
}

double clustering_distortion(std::span<const double> points, std::span<const double> centroids,
                             std::span<const std::uint32_t> assignment) {
  double d = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double e = points[k] - centroids[assignment[k]];
    d += e * e;
  }
  return d;
}

LayerClustering cluster_layer(std::span<const double> points, std::vector<double> init, int max_iters) {
  if (init.size() < 2) throw ConfigError("clustering needs at least two centroids");
  if (max_iters < 1) throw ConfigError("Lloyd iteration cap must be >= 1");
  for (double p : points) {
    if (!std::isfinite(p)) throw NumericError("non-finite weight passed to clustering");
  }
  LayerClustering out;
  out.centroids = std::move(init);
  out.centroids[0] = 0.0;
  const std::size_t k_count = out.centroids.size();

  std::vector<double> sums(k_count);
  std::vector<double> refs(k_count);
  std::vector<std::size_t> counts(k_count);

  for (int iter = 1; iter <= max_iters; ++iter) {
    auto next = assign_nearest(points, out.centroids);
    const double distortion = clustering_distortion(points, out.centroids, next);
    if (!out.distortion.empty()) {
      const double prev = out.distortion.back();
      if (distortion > prev * (1.0 + 1e-12) + 1e-300) {
        throw InvariantViolation("Lloyd distortion increased from " + std::to_string(prev) + " to " +
                                 std::to_string(distortion));
      }
    }
    out.distortion.push_back(distortion);
    out.iterations = iter;
    if (iter > 1 && next == out.assignment) {
      out.converged = true;
      break;
    }
    out.assignment = std::move(next);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto j = out.assignment[k];
      if (counts[j] == 0) refs[j] = points[k];
      sums[j] += points[k] - refs[j];
      ++counts[j];
    }
    for (std::size_t j = 1; j < k_count; ++j) {
      if (counts[j] > 0) out.centroids[j] = refs[j] + sums[j] / static_cast<double>(counts[j]);
    }
    out.centroids[0] = 0.0;
  }
  return out;
}

std::vector<double> random_init(std::span<const double> points, int clusters, std::uint64_t seed) {
  check_clusters(clusters);
  std::vector<double> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  // Zero is already slot 0; a second zero centroid could never win a point.
  distinct.erase(std::remove(distinct.begin(), distinct.end(), 0.0), distinct.end());
  const std::size_t need = static_cast<std::size_t>(clusters - 1);
  std::vector<double> init{0.0};
  init.reserve(static_cast<std::size_t>(clusters));
  if (distinct.size() >= need) {
    // Greedy D^2 seeding: each new slot is the best of a few points drawn
    // with probability proportional to their squared distance from the
    // slots chosen so far.
    Rng rng(seed);
    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(clusters)));
    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) d2[i] = points[i] * points[i];
    std::vector<double> cand(points.size());
    std::vector<double> best(points.size());
    while (init.size() < static_cast<std::size_t>(clusters)) {
      if (!(std::accumulate(d2.begin(), d2.end(), 0.0) > 0.0)) {
        // Squared distances underflowed; take the unused values in order.
        for (double v : distinct) {
          if (init.size() == static_cast<std::size_t>(clusters)) break;
          if (std::find(init.begin(), init.end(), v) == init.end()) init.push_back(v);
        }
        break;
      }
      std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
      double best_value = 0.0;
      double best_potential = std::numeric_limits<double>::infinity();
      for (int t = 0; t < trials; ++t) {
        const double c = points[pick(rng)];
        double potential = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = points[i] - c;
          cand[i] = std::min(d2[i], d * d);
          potential += cand[i];
        }
        if (potential < best_potential) {
          best_potential = potential;
          best_value = c;
          best.swap(cand);
        }
      }
      init.push_back(best_value);
      d2.swap(best);
    }
  } else {
    init.insert(init.end(), distinct.begin(), distinct.end());
    const double pad = distinct.empty() ? 0.0 : distinct.back();
    init.resize(static_cast<std::size_t>(clusters), pad);
  }
  return init;
}

namespace {

// [0; K-1 distinct nonzero values sampled uniformly], padded like random_init.
std::vector<double> uniform_init(std::span<const double> points, int clusters, std::uint64_t seed) {
  std::vector<double> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  distinct.erase(std::remove(distinct.begin(), distinct.end(), 0.0), distinct.end());
  const std::size_t need = static_cast<std::size_t>(clusters - 1);
  if (distinct.size() < need) return random_init(points, clusters, seed);
  std::vector<double> init{0.0};
  Rng rng(seed);
  std::sample(distinct.begin(), distinct.end(), std::back_inserter(init), need, rng);
  return init;
}

}  // namespace

LayerClustering cold_start(std::span<const double> points, int clusters, std::uint64_t seed, int max_iters) {
  LayerClustering best;
  double best_distortion = std::numeric_limits<double>::infinity();
  for (int r = 0; r < kColdRestarts; ++r) {
    const std::uint64_t rs = derive_seed(seed, {static_cast<std::uint64_t>(r)});
    std::vector<double> init = r % 2 == 0 ? random_init(points, clusters, rs) : uniform_init(points, clusters, rs);
    LayerClustering run = cluster_layer(points, std::move(init), max_iters);
    const double d = clustering_distortion(points, run.centroids, assign_nearest(points, run.centroids));
    if (d < best_distortion) {
      best_distortion = d;
      best = std::move(run);
    }
  }
  return best;
}

void sort_remap(std::vector<double>& centroids, std::vector<std::uint32_t>& assignment) {
  const std::size_t k_count = centroids.size();
  std::vector<std::uint32_t> order(k_count);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin() + 1, order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return centroids[a] < centroids[b]; });
  std::vector<double> sorted(k_count);
  std::vector<std::uint32_t> new_slot(k_count);
  for (std::size_t s = 0; s < k_count; ++s) {
    sorted[s] = centroids[order[s]];
    new_slot[order[s]] = static_cast<std::uint32_t>(s);
  }
  sorted[0] = 0.0;
  // Canonical slot: lowest slot holding the same value (zero maps to slot 0).
  std::vector<std::uint32_t> canonical(k_count);
  for (std::size_t s = 0; s < k_count; ++s) {
    canonical[s] = static_cast<std::uint32_t>(s);
    if (sorted[s] == 0.0) {
      canonical[s] = 0;
    } else if (s > 1 && sorted[s] == sorted[s - 1]) {
      canonical[s] = canonical[s - 1];
    }
  }
  for (auto& a : assignment) a = canonical[new_slot[a]];
  centroids = std::move(sorted);
}

EncodeResult wcp_encode(const ParamVector& w, const WcpOptions& options, const CentroidTable* init,
                        std::uint64_t seed) {
  check_clusters(options.clusters);
  check_value_bits(options.value_bits);
  if (options.max_iters < 1) throw ConfigError("Lloyd iteration cap must be >= 1");
  w.require_finite("wcp_encode input");
  const LayerLayout& layout = w.layout();
  const std::size_t compressible = layout.num_compressible();
  if (init != nullptr && !init->layers.empty()) {
    if (init->num_layers() != compressible || init->clusters() != options.clusters) {
      throw StructuralError("warm-start centroid table does not match layout and cluster count");
    }
  }

  EncodeResult out;
  out.payload.clusters = options.clusters;
  out.payload.value_bits = options.value_bits;
  out.payload.uncompressed.reserve(layout.uncompressed_total());
  out.quantized = w;
  std::vector<std::uint8_t> mask_bits(layout.total(), 1);

  std::size_t c = 0;
  for (std::size_t l = 0; l < layout.num_layers(); ++l) {
    const auto theta = w.layer(l);
    if (!layout.layer(l).compressible) {
      for (double v : theta) out.payload.uncompressed.push_back(round_to_bits(v, options.value_bits));
      continue;
    }
    LayerClustering run;
    if (init != nullptr && init->has_nonzero(c)) {
      std::vector<double> start = init->layers[c];
      start[0] = 0.0;
      run = cluster_layer(theta, std::move(start), options.max_iters);
    } else {
      run = cold_start(theta, options.clusters, derive_seed(seed, {stream::kCodec, l}), options.max_iters);
    }

    std::vector<double> centroids = run.centroids;
    for (double& v : centroids) v = round_to_bits(v, options.value_bits);
    centroids[0] = 0.0;
    std::vector<std::uint32_t> assignment = assign_nearest(theta, centroids);
    sort_remap(centroids, assignment);

    auto dst = out.quantized.layer(l);
    const std::size_t base = layout.offset(l);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      dst[k] = centroids[assignment[k]];
      mask_bits[base + k] = dst[k] != 0.0 ? 1 : 0;
      out.max_abs_error = std::max(out.max_abs_error, std::abs(dst[k] - theta[k]));
    }
    out.payload.tables.layers.push_back(std::move(centroids));
    out.payload.assignments.layers.push_back(std::move(assignment));
    out.traces.push_back(std::move(run));
    ++c;
  }
  out.mask = PruneMask(w.layout_ptr(), std::move(mask_bits));
  return out;
}

ParamVector wcp_decode(const CentroidPayload& payload, const LayoutPtr& layout) {
  if (!layout) throw StructuralError("decode requires a layout");
  ParamVector out(layout);
  if (payload.dense) {
    if (payload.uncompressed.size() != layout->total()) {
      throw StructuralError("dense payload length does not match layout");
    }
    std::copy(payload.uncompressed.begin(), payload.uncompressed.end(), out.values().begin());
    out.require_finite("wcp_decode");
    return out;
  }
  if (payload.tables.num_layers() != layout->num_compressible() ||
      payload.assignments.layers.size() != layout->num_compressible() ||
      payload.uncompressed.size() != layout->uncompressed_total()) {
    throw StructuralError("payload does not match layout");
  }
  std::size_t c = 0;
  std::size_t u = 0;
  for (std::size_t l = 0; l < layout->num_layers(); ++l) {
    auto dst = out.layer(l);
    if (!layout->layer(l).compressible) {
      for (double& v : dst) v = payload.uncompressed[u++];
      continue;
    }
    const auto& table = payload.tables.layers[c];
    const auto& assignment = payload.assignments.layers[c];
    if (assignment.size() != dst.size()) throw StructuralError("assignment length does not match layer");
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (assignment[k] >= table.size()) throw CorruptPayload("assignment index out of range");
      dst[k] = table[assignment[k]];
    }
    ++c;
  }
  out.require_finite("wcp_decode");
  return out;
}

CentroidPayload dense_payload(const ParamVector& w, int value_bits) {
  check_value_bits(value_bits);
  CentroidPayload p;
  p.dense = true;
  p.value_bits = value_bits;
  p.uncompressed.reserve(w.size());
  for (double v : w.values()) p.uncompressed.push_back(round_to_bits(v, value_bits));
  return p;
}

std::size_t wire_header_bytes(std::size_t compressible_layers) { return 40 + 4 * compressible_layers; }

std::vector<std::uint8_t> serialize(const CentroidPayload& payload, double mass, std::uint32_t sender,
                                    std::uint64_t gen_event) {
  check_value_bits(payload.value_bits);
  const std::size_t layers = payload.dense ? 0 : payload.tables.num_layers();
  if (!payload.dense) {
    check_clusters(payload.clusters);
    if (payload.assignments.layers.size() != layers) throw StructuralError("payload tables/assignments disagree");
  }
  std::vector<std::uint8_t> out;
  put_le<std::uint32_t>(out, kWireMagic);
  put_le<std::uint8_t>(out, kWireVersion);
  put_le<std::uint8_t>(out, payload.dense ? 1 : 0);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(payload.value_bits));
  put_le<std::uint8_t>(out, 0);
  put_le<std::uint32_t>(out, payload.dense ? 0U : static_cast<std::uint32_t>(payload.clusters));
  put_le<std::uint32_t>(out, sender);
  put_le<std::uint64_t>(out, gen_event);
  put_le<double>(out, mass);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layers));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(payload.uncompressed.size()));
  for (std::size_t c = 0; c < layers; ++c) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(payload.assignments.layers[c].size()));
  }

  BitWriter bits(out);
  const int vb = payload.value_bits;
  if (!payload.dense) {
    const int ib = index_bits(payload.clusters);
    for (std::size_t c = 0; c < layers; ++c) {
      const auto& table = payload.tables.layers[c];
      if (static_cast<int>(table.size()) != payload.clusters) throw StructuralError("centroid table size != K");
      for (std::size_t j = 1; j < table.size(); ++j) bits.put(encode_value(table[j], vb), vb);
      for (std::uint32_t a : payload.assignments.layers[c]) bits.put(a, ib);
    }
  }
  for (double v : payload.uncompressed) bits.put(encode_value(v, vb), vb);
  return out;
}

WireMessage deserialize(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (get_le<std::uint32_t>(bytes, pos) != kWireMagic) throw CorruptPayload("bad magic");
  if (get_le<std::uint8_t>(bytes, pos) != kWireVersion) throw CorruptPayload("unsupported wire version");
  const auto flags = get_le<std::uint8_t>(bytes, pos);
  const int vb = get_le<std::uint8_t>(bytes, pos);
  get_le<std::uint8_t>(bytes, pos);
  if (vb != 16 && vb != 32 && vb != 64) throw CorruptPayload("bad value width");
  WireMessage msg;
  CentroidPayload& p = msg.payload;
  p.dense = (flags & 1U) != 0;
  p.value_bits = vb;
  const auto clusters = get_le<std::uint32_t>(bytes, pos);
  msg.sender = get_le<std::uint32_t>(bytes, pos);
  msg.gen_event = get_le<std::uint64_t>(bytes, pos);
  msg.mass = get_le<double>(bytes, pos);
  const auto layers = get_le<std::uint32_t>(bytes, pos);
  const auto raw_count = get_le<std::uint32_t>(bytes, pos);
  if (!std::isfinite(msg.mass)) throw CorruptPayload("non-finite mass");
  if (p.dense && (layers != 0 || clusters != 0)) throw CorruptPayload("dense payload with tables");
  if (!p.dense && (clusters < 2 || clusters > (1U << 16))) throw CorruptPayload("bad cluster count");
  p.clusters = static_cast<int>(clusters);

  std::vector<std::uint32_t> lengths(layers);
  std::uint64_t body_bits = std::uint64_t{raw_count} * static_cast<std::uint64_t>(vb);
  const int ib = p.dense ? 0 : index_bits(p.clusters);
  for (auto& len : lengths) {
    len = get_le<std::uint32_t>(bytes, pos);
    body_bits += std::uint64_t{clusters - 1} * static_cast<std::uint64_t>(vb) +
                 std::uint64_t{len} * static_cast<std::uint64_t>(ib);
  }
  if (bytes.size() - pos != (body_bits + 7) / 8) throw CorruptPayload("payload length mismatch");

  BitReader reader(bytes.subspan(pos));
  for (std::uint32_t c = 0; c < layers; ++c) {
    std::vector<double> table(clusters, 0.0);
    for (std::size_t j = 1; j < table.size(); ++j) table[j] = decode_value(reader.get(vb), vb);
    std::vector<std::uint32_t> assignment(lengths[c]);
    for (auto& a : assignment) {
      a = static_cast<std::uint32_t>(reader.get(ib));
      if (a >= clusters) throw CorruptPayload("assignment index out of range");
    }
    p.tables.layers.push_back(std::move(table));
    p.assignments.layers.push_back(std::move(assignment));
  }
  p.uncompressed.resize(raw_count);
  for (double& v : p.uncompressed) v = decode_value(reader.get(vb), vb);
  for (const auto& t : p.tables.layers) {
    for (double v : t) {
      if (!std::isfinite(v)) throw CorruptPayload("non-finite centroid");
    }
  }
  for (double v : p.uncompressed) {
    if (!std::isfinite(v)) throw CorruptPayload("non-finite raw value");
  }
  return msg;
}

CommCost comm_cost_bits(const LayerLayout& layout, int clusters, int value_bits) {
  check_clusters(clusters);
  check_value_bits(value_bits);
  const std::uint64_t b = static_cast<std::uint64_t>(value_bits);
  const std::uint64_t ib = static_cast<std::uint64_t>(index_bits(clusters));
  CommCost cost;
  for (const auto& spec : layout.layers()) {
    cost.full_bits += spec.length * b;
    if (spec.compressible) {
      cost.wcp_bits += static_cast<std::uint64_t>(clusters - 1) * b + spec.length * ib;
    } else {
      cost.wcp_bits += spec.length * b;
    }
  }
  cost.ratio = cost.full_bits == 0 ? 0.0 : static_cast<double>(cost.wcp_bits) / static_cast<double>(cost.full_bits);
  return cost;
}

}  // namespace pushcen
