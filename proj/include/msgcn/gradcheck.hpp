#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msgcn {

struct GradCheckOptions {
  int instances = 20;
  double step = 1e-5;
  double rel_tolerance = 1e-4;
  // A coordinate also passes when |analytic - numeric| is below this.
  double abs_tolerance = 1e-7;
  // Instances with any relu input closer than this to zero are redrawn, since
  // a central difference across the kink is meaningless.
  double kink_margin = 1e-4;
};

struct GradCheckInstance {
  std::string description;
  int hidden = 0;
  std::size_t parameters = 0;
  std::size_t batch = 0;
  int redraws = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t failures = 0;
  bool passed() const { return failures == 0; }
};

struct GradCheckReport {
  std::vector<GradCheckInstance> instances;
  bool passed() const;
  std::string format() const;
};

// Central differences of the full batch loss (all three terms, dropout off)
// against backward() on random networks, parameters and hidden widths.
GradCheckReport run_gradcheck(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace msgcn
