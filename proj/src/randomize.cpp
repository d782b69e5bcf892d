#include "assortgen/error.hpp"
#include "assortgen/graph.hpp"
#include "assortgen/rewire.hpp"

namespace assortgen {

Graph randomize_configuration(const Graph& g, Seed seed, std::size_t swap_budget) {
  if (swap_budget < 1) throw Error(ErrorKind::InvalidArgument, "swap_budget must be >= 1");
  Graph out = g;
  if (out.num_edges() < 2) return out;
  Rng rng = make_rng(seed);
  const std::size_t max_proposals = 100 * swap_budget;
  std::size_t accepted = 0;
  for (std::size_t proposals = 0; proposals < max_proposals && accepted < swap_budget; ++proposals) {
    const RewiringAction a = random_action(out, rng);
    if (!is_valid(out, a)) continue;
    apply_unchecked(out, a);
    ++accepted;
  }
  return out;
}

}  // namespace assortgen
