#pragma once

// Cross-route verification battery behind `bhe verify`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bhe/params.hpp"

namespace bhe::verify {

struct Check {
  int group = 0;  // 1..11, see README
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  bool quick = false;  // analytic routes only
  std::uint64_t grid_seed = 1;
  std::size_t grid_size = 200;
  std::uint64_t mc_seed = 1;
  unsigned workers = 0;
};

struct Report {
  std::vector<Check> checks;
  bool all_passed() const;
  std::vector<std::string> failures() const;
};

/// Log-uniform g/kappa in [1e-2, 1e2] and kappa_h/kappa_c in [0.2, 5];
/// occupations uniform in [0, 10]; Delta uniform in [0.5, 2]. Occupation
/// pairs are redrawn when they coincide.
std::vector<EngineParams> random_grid(std::uint64_t seed, std::size_t n);

/// Same point with the occupations ordered so that nbar_h > nbar_c.
EngineParams forward_biased(const EngineParams& p);

/// Runs every check; `on_check` sees each result as it completes.
Report run(const Options& opts, const std::function<void(const Check&)>& on_check = {});

}  // namespace bhe::verify
