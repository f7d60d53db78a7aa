#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"

namespace atgforge::oracle {

std::filesystem::path data_dir();

std::vector<TheoremRecord> load_fixture(const std::string& file_name);

/// A random mock theorem whose proof has exactly `length` tactics: the goal
/// wraps a random term in identity layers, the proof peels one layer per
/// step and closes with `rfl`, with occasional trivial `have` steps mixed in.
TheoremRecord random_mock_proof(std::mt19937_64& rng, std::size_t length, const std::string& name);

/// A random closed-or-open term without identity subterms, printed.
std::string random_term(std::mt19937_64& rng, int depth);

}  // namespace atgforge::oracle
