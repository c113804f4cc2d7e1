#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trajprop/forecasters.hpp"

namespace trajprop {

/// Observation, ground truth and the k most probable proposals (all of them
/// when unranked) in position space, proposals labelled with probabilities.
std::string render_topk_svg(const ProposalSet& ps, const std::vector<Vec2>& truth, std::size_t k,
                            const std::string& title);

}  // namespace trajprop
