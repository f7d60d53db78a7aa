#include "corpus.hpp"

#ifndef ATGFORGE_TEST_DATA
#error "ATGFORGE_TEST_DATA must point at tests/data"
#endif

namespace atgforge::oracle {

std::filesystem::path data_dir() { return std::filesystem::path(ATGFORGE_TEST_DATA); }

std::vector<TheoremRecord> load_fixture(const std::string& file_name) { return read_records(data_dir() / file_name); }

std::string random_term(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"x", "y", "z", "n"};
  std::uniform_int_distribution<int> pick(0, 3);
  if (depth <= 0 || pick(rng) == 0) {
    if (pick(rng) < 2) return vars[pick(rng)];
    return std::to_string(2 + pick(rng));
  }
  std::string a = random_term(rng, depth - 1);
  std::string b = random_term(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return "(" + a + " + " + b + ")";
    case 1: return "(" + a + " * " + b + ")";
    case 2: return "f " + (a.front() == '(' ? a : "(" + a + ")");
    default: return "(" + b + " + " + a + ")";
  }
}

TheoremRecord random_mock_proof(std::mt19937_64& rng, std::size_t length, const std::string& name) {
  if (length == 0) throw std::invalid_argument("proof length must be positive");
  struct Layer {
    const char* prefix;
    const char* suffix;
    const char* rule;
  };
  static const Layer layers[] = {
      {"(", " + 0)", "rw [add_zero]"},
      {"(0 + ", ")", "rw [zero_add]"},
      {"(", " * 1)", "rw [mul_one]"},
      {"(1 * ", ")", "rw [one_mul]"},
  };
  std::uniform_int_distribution<int> pick_layer(0, 3);
  std::uniform_int_distribution<int> coin(0, 4);

  std::size_t body = length - 1;  // everything except the closing rfl
  std::vector<std::string> steps;
  std::string term = random_term(rng, 2);
  std::string wrapped = term;
  std::vector<std::string> unwrap;
  std::size_t haves = 0;
  for (std::size_t i = 0; i < body; ++i) {
    if (i > 0 && coin(rng) == 0) {
      steps.push_back("have h" + std::to_string(haves++) + " : x = x := rfl");
      continue;
    }
    const Layer& l = layers[pick_layer(rng)];
    wrapped = std::string(l.prefix) + wrapped + l.suffix;
    unwrap.push_back(l.rule);
    steps.push_back("");
  }
  // Rewrites peel layers outermost-first, so assign them in reverse order of
  // wrapping to the non-have slots.
  auto it = unwrap.rbegin();
  for (auto& s : steps) {
    if (s.empty()) s = *it++;
  }
  steps.push_back("rfl");

  TheoremRecord r;
  r.name = name;
  r.goal = wrapped + " = " + term;
  r.proof = make_steps(steps);
  return r;
}

}  // namespace atgforge::oracle
