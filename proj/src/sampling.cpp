#include "cntrl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cntrl/error.hpp"

namespace cntrl {

SampledToken sample_top_k(std::span<const double> logits, int k, double temperature, Rng& rng) {
  if (logits.empty()) throw ContractError("sample_top_k: no logits");
  if (k < 1) throw ContractError("sample_top_k: k must be >= 1");
  if (!(temperature > 0.0)) throw ContractError("sample_top_k: temperature must be > 0");

  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (logits[a] != logits[b]) return logits[a] > logits[b];
                      return a < b;
                    });
  order.resize(keep);

  const double top = logits[order.front()] / temperature;
  std::vector<double> weights(keep);
  double total = 0.0;
  for (std::size_t j = 0; j < keep; ++j) {
    weights[j] = std::exp(logits[order[j]] / temperature - top);
    total += weights[j];
  }
  const double u = uniform_unit(rng) * total;
  double acc = 0.0;
  std::size_t pick = keep - 1;
  for (std::size_t j = 0; j < keep; ++j) {
    acc += weights[j];
    if (u < acc) {
      pick = j;
      break;
    }
  }
  return {order[pick], std::log(weights[pick] / total)};
}

}  // namespace cntrl
