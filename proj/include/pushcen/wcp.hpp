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

#ifndef PUSHCEN_WCP_HPP
#define PUSHCEN_WCP_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pushcen/params.hpp"

namespace pushcen {

// Rounds v to the nearest value representable in a `bits`-wide IEEE float
// (16, 32 or 64). Negative zero is normalized to +0.
double round_to_bits(double v, int bits);

std::uint16_t float_to_half(float f);
float half_to_float(std::uint16_t h);

// Bits needed per assignment index: ceil(log2(K)).
int index_bits(int clusters);

// Per compressible layer, K centroid slots. Slot 0 is the fixed zero centroid.
struct CentroidTable {
  std::vector<std::vector<double>> layers;

  static CentroidTable zeros(std::size_t num_layers, int clusters);

  std::size_t num_layers() const { return layers.size(); }
  int clusters() const { return layers.empty() ? 0 : static_cast<int>(layers.front().size()); }
  // A table with no nonzero slot carries no information for warm starts.
  bool has_nonzero(std::size_t layer) const;

  bool operator==(const CentroidTable&) const = default;
};

struct AssignmentMap {
  std::vector<std::vector<std::uint32_t>> layers;

  bool operator==(const AssignmentMap&) const = default;
};

// What travels on the wire: (V, A, U). A dense payload carries every layer in
// `uncompressed` and no tables; the full-precision baselines use it.
struct CentroidPayload {
  int clusters = 0;
  int value_bits = 32;
  bool dense = false;
  CentroidTable tables;
  AssignmentMap assignments;
  std::vector<double> uncompressed;

  bool operator==(const CentroidPayload&) const = default;
};

struct WcpOptions {
  int clusters = 32;
  int max_iters = 20;
  int value_bits = 32;
};

// Result of 1-D zero-anchored Lloyd clustering on one layer.
struct LayerClustering {
  std::vector<double> centroids;          // slot 0 == 0
  std::vector<std::uint32_t> assignment;  // nearest-centroid index per point
  std::vector<double> distortion;         // after each assignment step
  int iterations = 0;
  bool converged = false;
};

// Nearest centroid per point; ties go to the lowest index.
std::vector<std::uint32_t> assign_nearest(std::span<const double> points, std::span<const double> centroids);

double clustering_distortion(std::span<const double> points, std::span<const double> centroids,
                             std::span<const std::uint32_t> assignment);

// Lloyd iterations with slot 0 pinned to zero. Empty clusters keep their
// previous centroid. Stops after max_iters or when no assignment changes.
// Throws InvariantViolation if the distortion ever increases.
LayerClustering cluster_layer(std::span<const double> points, std::vector<double> init, int max_iters);

// [0; K-1 distinct nonzero values drawn from points by greedy D^2 seeding], padded
// with the max value when there are not enough distinct values.
std::vector<double> random_init(std::span<const double> points, int clusters, std::uint64_t seed);

inline constexpr int kColdRestarts = 8;

// Clustering without a warm start: Lloyd from kColdRestarts seeded inits
// (alternating random_init and a uniform draw of distinct values), keeping the
// run with the lowest final distortion (first on ties).
LayerClustering cold_start(std::span<const double> points, int clusters, std::uint64_t seed, int max_iters);

// Sorts slots 1..K-1 ascending (stable), keeps slot 0 at zero, and points each
// assignment at the lowest slot holding its value.
void sort_remap(std::vector<double>& centroids, std::vector<std::uint32_t>& assignment);

struct EncodeResult {
  CentroidPayload payload;
  PruneMask mask;
  // Input with compressible layers replaced by their centroid lookup.
  ParamVector quantized;
  std::vector<LayerClustering> traces;
  // max |quantized - input| over compressible entries.
  double max_abs_error = 0.0;
};

// Weight clustering pruning. When `init` has a nonzero slot for a layer the
// Lloyd run is warm-started from it, otherwise from random_init.
EncodeResult wcp_encode(const ParamVector& w, const WcpOptions& options, const CentroidTable* init,
                        std::uint64_t seed);

ParamVector wcp_decode(const CentroidPayload& payload, const LayoutPtr& layout);

CentroidPayload dense_payload(const ParamVector& w, int value_bits);

struct WireMessage {
  CentroidPayload payload;
  double mass = 0.0;
  std::uint32_t sender = 0;
  std::uint64_t gen_event = 0;

  bool operator==(const WireMessage&) const = default;
};

inline constexpr std::uint32_t kWireMagic = 0x43574350;  // "PCWC"
inline constexpr std::uint8_t kWireVersion = 1;

std::size_t wire_header_bytes(std::size_t compressible_layers);

std::vector<std::uint8_t> serialize(const CentroidPayload& payload, double mass, std::uint32_t sender,
                                    std::uint64_t gen_event);

WireMessage deserialize(std::span<const std::uint8_t> bytes);

struct CommCost {
  std::uint64_t full_bits = 0;
  std::uint64_t wcp_bits = 0;
  double ratio = 0.0;
};

CommCost comm_cost_bits(const LayerLayout& layout, int clusters, int value_bits);

}  // namespace pushcen

#endif  // PUSHCEN_WCP_HPP
