#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace trajprop {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over raw bytes. Stable across platforms, used for config
/// hashes and seed derivation.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// child_seed = hash(global_seed, stage_name, run_index)
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage,
                          std::uint64_t run_index = 0);

std::string hex64(std::uint64_t v);

}  // namespace trajprop
