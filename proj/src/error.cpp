#include "kdvlab/error.hpp"

#include <sstream>

namespace kdvlab {

namespace {
std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}
}  // namespace

UnresolvedGap::UnresolvedGap(std::vector<int> gaps)
    : NumericalError("unresolved spectral gaps: " + join(gaps)), gaps_(std::move(gaps)) {}

ResonanceDetected::ResonanceDetected(std::vector<int> k)
    : NumericalError("resonant harmonic k=(" + join(k) + ")"), k_(std::move(k)) {}

}  // namespace kdvlab
