#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kdvlab {

/// Base class for every numerical failure raised by the library.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state or norm-ceiling violation during time integration.
class IntegrationBlowup : public NumericalError {
 public:
  IntegrationBlowup(double t, const std::string& what)
      : NumericalError("integration blowup at t=" + std::to_string(t) + ": " + what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class HorizonExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Angles are undefined where an action vanishes; estimates that need them refuse.
class ActionBelowThreshold : public NumericalError {
 public:
  ActionBelowThreshold(int k, double action)
      : NumericalError("action I_" + std::to_string(k) + "=" + std::to_string(action) +
                       " below threshold"),
        mode_(k) {}
  int mode() const noexcept { return mode_; }

 private:
  int mode_;
};

class RootBracketFailure : public NumericalError {
 public:
  RootBracketFailure(int gap, double lo, double hi)
      : NumericalError("no root of the discriminant for gap " + std::to_string(gap) + " in [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        lo_(lo), hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_, hi_;
};

class UnresolvedGap : public NumericalError {
 public:
  explicit UnresolvedGap(std::vector<int> gaps);
  const std::vector<int>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<int> gaps_;
};

class ResonanceDetected : public NumericalError {
 public:
  explicit ResonanceDetected(std::vector<int> k);
  const std::vector<int>& harmonic() const noexcept { return k_; }

 private:
  std::vector<int> k_;
};

class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RangeMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Invalid configuration; `path()` names the offending field, e.g. "grid.n_modes".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace kdvlab
