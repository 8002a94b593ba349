#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace opscore::reward {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckRow {
  std::string name;
  std::size_t parameters = 0;
  double max_relative_error = 0.0;
  bool passed() const { return max_relative_error < kGradCheckTolerance; }
};

// Finite-difference checks of the dense layer, LSTM through time, VAE
// posterior head, and the full dynamic and safety ELBOs on seeded random data.
// `corrupt` perturbs one analytic gradient entry per row (negative control).
std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed, bool corrupt = false);

}  // namespace opscore::reward
