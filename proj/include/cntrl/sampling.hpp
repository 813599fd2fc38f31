#pragma once

#include <cstddef>
#include <span>

#include "cntrl/random.hpp"

namespace cntrl {

struct SampledToken {
  std::size_t index = 0;
  double logprob = 0.0;  // under the truncated, tempered distribution
};

// Keeps the k highest logits (ties: lower index), applies softmax(logit / T)
// over them and draws one. Throws ContractError on k < 1, T <= 0 or empty input.
SampledToken sample_top_k(std::span<const double> logits, int k, double temperature, Rng& rng);

}  // namespace cntrl
