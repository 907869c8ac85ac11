#pragma once

// Shared value types for the driven-dissipative Rydberg mean-field model.
//
// Units: the Rydberg decay rate gamma is the frequency unit and time is
// measured in 1/gamma. Parameters quoted "in units of gamma" are used as-is.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rydmf {

/// Raised when a parameter set or input violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tolerance used when checking the Bloch-ball constraint on computed states.
inline constexpr double kBlochBallTolerance = 1e-6;

struct SystemParams {
  double omega = 0.0;   ///< Rabi frequency
  double delta0 = 0.0;  ///< static two-photon detuning
  double vbar = 0.0;    ///< mean-field interaction shift
  double gamma = 1.0;   ///< Rydberg decay rate (frequency unit)

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Reference bistable point: Omega = 0.7, Delta0 = 3.5, Vbar = -12.
inline constexpr SystemParams kBistableReference{0.7, 3.5, -12.0, 1.0};

struct BlochState {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double n_r = 0.0;  ///< Rydberg population

  friend bool operator==(const BlochState&, const BlochState&) = default;

  /// sigma_x^2 + sigma_y^2 + sigma_z^2 with sigma_z = 2 n_r - 1.
  double bloch_radius_squared() const {
    const double sz = 2.0 * n_r - 1.0;
    return sigma_x * sigma_x + sigma_y * sigma_y + sz * sz;
  }

  bool inside_bloch_ball(double eps = kBlochBallTolerance) const {
    return bloch_radius_squared() <= 1.0 + eps && n_r >= -eps && n_r <= 1.0 + eps;
  }
};

/// Checks every SystemParams invariant and returns the value unchanged.
/// Throws ValidationError naming the first violated invariant.
inline SystemParams validate_params(const SystemParams& p) {
  if (!std::isfinite(p.omega)) throw ValidationError("omega must be finite");
  if (!std::isfinite(p.delta0)) throw ValidationError("delta0 must be finite");
  if (!std::isfinite(p.vbar)) throw ValidationError("vbar must be finite");
  if (!std::isfinite(p.gamma)) throw ValidationError("gamma must be finite");
  if (!(p.gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (p.omega < 0.0) throw ValidationError("omega must be non-negative");
  return p;
}

/// Affine readout of the probe transmission from the Rydberg population.
struct TransmissionScale {
  double gain = 1.0;
  double offset = 0.0;
};

inline double transmission(double n_r, TransmissionScale scale = {}) {
  return scale.gain * n_r + scale.offset;
}

/// Uniformly sampled multi-channel time series.
///
/// Channels are kept in insertion order so that serialization is
/// deterministic. All channels share one length.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double t0, double dt) : t0_(t0), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return channels_.empty() ? 0 : channels_.front().second.size(); }
  double time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
  double t_end() const { return size() == 0 ? t0_ : time(size() - 1); }

  bool has(const std::string& name) const { return find(name) != nullptr; }

  const std::vector<double>& channel(const std::string& name) const {
    const auto* c = find(name);
    if (c == nullptr) throw ValidationError("missing channel '" + name + "'");
    return *c;
  }

  std::vector<std::string> channel_names() const {
    std::vector<std::string> names;
    names.reserve(channels_.size());
    for (const auto& [n, _] : channels_) names.push_back(n);
    return names;
  }

  void add_channel(std::string name, std::vector<double> values) {
    if (has(name)) throw ValidationError("duplicate channel '" + name + "'");
    if (!channels_.empty() && values.size() != size())
      throw ValidationError("channel '" + name + "' length mismatch");
    channels_.emplace_back(std::move(name), std::move(values));
  }

  /// Throws unless the container satisfies its invariants (>= 2 samples).
  void validate() const {
    if (channels_.empty()) throw ValidationError("time series has no channels");
    if (size() < 2) throw ValidationError("time series needs at least 2 samples");
  }

  /// Samples [first, first + count) of every channel, with t0 shifted.
  TimeSeries slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw ValidationError("slice out of range");
    TimeSeries out(time(first), dt_);
    for (const auto& [n, v] : channels_)
      out.add_channel(n, std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                                             v.begin() + static_cast<std::ptrdiff_t>(first + count)));
    return out;
  }

 private:
  const std::vector<double>* find(const std::string& name) const {
    for (const auto& [n, v] : channels_)
      if (n == name) return &v;
    return nullptr;
  }

  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

namespace channels {
inline const std::string kSigmaX = "sigma_x";
inline const std::string kSigmaY = "sigma_y";
inline const std::string kNr = "n_r";
inline const std::string kDeltaC = "delta_c";
inline const std::string kDetuning = "detuning";
inline const std::string kTransmission = "transmission";
}  // namespace channels

}  // namespace rydmf
