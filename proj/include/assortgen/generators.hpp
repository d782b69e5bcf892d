#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "assortgen/graph.hpp"

namespace assortgen {

enum class Family { WS, ER, BA, SBM, RGG, CL, HK };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

/// Initial-topology model. All families are parameterized by a target mean
/// degree; the remaining fields carry family-specific defaults.
struct ModelSpec {
  Family family{Family::ER};
  std::size_t n{100};
  double mean_degree{6.0};

  std::optional<std::size_t> num_edges;  // ER: exact edge count, G(n, m)
  double rewire_p{0.1};                   // WS
  std::size_t num_blocks{4};              // SBM
  double block_ratio{10.0};               // SBM: p_in / p_out
  double cl_gamma{2.5};                   // CL degree exponent
  double triad_p{0.5};                    // HK triad-formation probability

  /// Throws InvalidArgument if parameters are outside their valid ranges.
  void validate() const;
};

/// Deterministic under seed. Throws InvalidArgument on infeasible params.
Graph generate(const ModelSpec& spec, Seed seed);

/// Attachment count used by BA/HK: floor(<k>/2), at least 1.
std::size_t growth_edges_per_node(const ModelSpec& spec);

}  // namespace assortgen
