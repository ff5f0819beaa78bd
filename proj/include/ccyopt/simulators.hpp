#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ccyopt/types.hpp"

namespace ccyopt {

// A pure, deterministic black box: identical (x, xi) give identical metrics.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual std::string name() const = 0;
  virtual int design_dim() const = 0;
  virtual int noise_dim() const = 0;
  virtual std::vector<std::string> metric_names() const = 0;
  virtual Vector evaluate(const Vector& x, const Vector& xi) const = 0;

  // rows of `xp` hold [x | xi]; default runs rows in parallel.
  virtual Matrix evaluate_batch(const Matrix& xp) const;
};

// Power transmission sampled over exactly one free spectral range. The grid
// carries a small fixed offset from band center so that a symmetric response
// never produces bitwise-tied twin maxima. `drop` is the cross port for
// lattice devices.
struct SpectralResponse {
  Vector frequency;  // GHz relative to band center, strictly increasing
  Vector through;
  Vector drop;
};

enum class Port { through, drop };

// Device constants (silicon near 1.55 um; ring radius 10 um).
namespace device {
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double ring_n_eff = 2.44;
inline constexpr double ring_n_g = 4.19;
inline constexpr double ring_radius_m = 10e-6;
inline constexpr double mzi_fsr_ghz = 1000.0;
inline constexpr double mzi_gap_decay_nm = 260.0;
double ring_fsr_ghz();
}  // namespace device

// Transfer-matrix cascade of three identical lossless rings between two
// buses; `couplings` holds the four effective field coupling coefficients.
SpectralResponse microring_response(const Vector& couplings, int n_points = 2001);

// Third-order Mach-Zehnder lattice C(k3) D C(k2) D C(k1); `couplings` holds
// the three effective field coupling coefficients.
SpectralResponse mzi_response(const Vector& couplings, int n_points = 2001);

// Width of the maximal contiguous interval around the peak where the port
// stays within 3 dB of its maximum, with linear interpolation in dB at the
// crossings. Errors on tied separate maxima and on peaks at the grid edge.
double bandwidth_3db(const SpectralResponse& response, Port port);

double extinction_ratio(const SpectralResponse& response);  // dB, drop port
double passband_roughness(const SpectralResponse& response);  // dB, drop port
double crosstalk(const SpectralResponse& response);  // dB, cross (drop) port
double attenuation(const SpectralResponse& response);  // dB, cross (drop) port

std::unique_ptr<Simulator> make_synthetic();
std::unique_ptr<Simulator> make_microring(int n_points = 2001);
std::unique_ptr<Simulator> make_mzi(int n_points = 2001);

// Built-in lookup by name ("synthetic", "microring", "mzi"); null if unknown.
std::unique_ptr<Simulator> make_builtin(const std::string& name);

}  // namespace ccyopt
