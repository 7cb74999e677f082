#pragma once

#include <cstdint>
#include <string_view>

#include "kdvlab/spectral.hpp"

namespace kdvlab {

enum class PerturbationKind { fixed_profile, smoothing_map };

/// Catalogue of state-dependent perturbations. S denotes the smoothing
/// multiplier (-d^2/dx^2)^{-order/2}, symbol (2 pi |s|)^{-order}.
enum class SmoothingMap {
  none,
  smoothed_damping,  ///< f = profile - gain * S u
  smoothed_square,   ///< f = profile + gain * S (u^2 - mean)
};

SmoothingMap parse_smoothing_map(std::string_view id);
std::string_view to_string(SmoothingMap m);

/// Outcome of the empirical smoothing spot check.
struct SmoothingCheck {
  bool passed = true;
  /// Worst ratio of the high-frequency gain to the low-frequency gain.
  double worst_ratio = 1.0;
};

/// The map u -> f(x, u(.)) on the right-hand side of the perturbed equation.
class PerturbationSpec {
 public:
  /// f = 0.
  static PerturbationSpec none(int n_modes);
  /// u-independent forcing f(x).
  static PerturbationSpec fixed(SpectralField profile, double zeta0 = 2.0);
  /// State-dependent smoothing map. `order` is the actual smoothing order of S
  /// (defaults to zeta0); construction verifies empirically that the map gains
  /// zeta0 derivatives and throws std::invalid_argument otherwise.
  static PerturbationSpec smoothing(SmoothingMap map, double gain, double zeta0, SpectralField profile,
                                    double order = 0.0);

  PerturbationKind kind() const noexcept { return kind_; }
  SmoothingMap map() const noexcept { return map_; }
  double zeta0() const noexcept { return zeta0_; }
  double gain() const noexcept { return gain_; }
  double order() const noexcept { return order_; }
  const SpectralField& profile() const noexcept { return profile_; }

  /// f(x, u) on u's modes.
  SpectralField evaluate(const SpectralField& u) const;
  /// Writes f(x, u) into `out` (same mode count as u).
  void evaluate_into(const SpectralField& u, SpectralField& out) const;

  /// Scalar rate m_j of the diagonal linear part of f, mode j (1-based).
  double diagonal_rate(int j) const;
  /// True when f depends on u beyond its diagonal linear part.
  bool has_nonlinear_part() const noexcept { return map_ == SmoothingMap::smoothed_square; }
  bool is_zero() const;

  /// f scaled by a (profile and gain).
  PerturbationSpec scaled(double a) const;

  /// Spot check of the smoothing property on seeded random inputs.
  SmoothingCheck verify_smoothing(int n_modes, std::uint64_t seed) const;

 private:
  PerturbationKind kind_ = PerturbationKind::fixed_profile;
  SmoothingMap map_ = SmoothingMap::none;
  double zeta0_ = 2.0;
  double gain_ = 0.0;
  double order_ = 2.0;
  SpectralField profile_;
};

}  // namespace kdvlab
