#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lambert/lighting.hpp"

namespace lambert {

// Sun position and atmospheric turbidity for the analytic skylight.
struct SkylightParams {
  double theta_s = 0.7;   // sun zenith angle, [0, pi/2]
  double phi_s = 0.0;     // sun azimuth, [0, 2 pi)
  double turbidity = 3.0; // >= 1

  SkylightParams clamped() const;
};

inline constexpr int kSkylightBands = 6;
inline constexpr int kSkylightThetaPowers = 14;  // i = 0..13
inline constexpr int kSkylightTauPowers = 8;     // j = 0..7
inline constexpr double kSkylightTauMax = 10.0;

// Polynomial fit (p_{l,m})_{i,j} per channel: the SH coefficients of the sky
// with the sun in the phi = 0 half-plane are
//   U~_{l,m}(theta_s, tau) = sum_ij (p_{l,m})_{i,j} theta_s^i tau^j
// and general sun azimuths come from the zonal rotation in skylight_sh.
struct SkylightFit {
  // (l,m)-major by l(l+1)+m, then i, then j, then channel; shape (49,14,8,3).
  std::vector<double> p;
  std::uint64_t checksum = 0;  // FNV-1a of the payload bytes

  static constexpr std::size_t size() {
    return static_cast<std::size_t>(sh::coeff_count(kSkylightBands)) * kSkylightThetaPowers *
           kSkylightTauPowers * 3;
  }
  double at(int flat_lm, int i, int j, int channel) const {
    return p[((static_cast<std::size_t>(flat_lm) * kSkylightThetaPowers + i) * kSkylightTauPowers +
              j) * 3 + channel];
  }
  double& at(int flat_lm, int i, int j, int channel) {
    return p[((static_cast<std::size_t>(flat_lm) * kSkylightThetaPowers + i) * kSkylightTauPowers +
              j) * 3 + channel];
  }
};

// Binary format: magic "PSKY1", then the little-endian IEEE-754 double tensor.
SkylightFit load_skylight_fit(const std::string& path);
void save_skylight_fit(const SkylightFit& fit, const std::string& path);

// Sky SH coefficients for the given sun position and turbidity (bands fixed
// at 6):
//   U_{l,m} = U~_{l,m} cos(m phi_s) + U~_{l,-m} sin(m phi_s)
ShCoeffs skylight_sh(const SkylightParams& params, const SkylightFit& fit);

struct SkylightGrad {
  ShCoeffs d_theta;
  ShCoeffs d_phi;
  ShCoeffs d_tau;
};

// Analytic partials of every coefficient with respect to the three skylight
// parameters.
SkylightGrad skylight_sh_grad(const SkylightParams& params, const SkylightFit& fit);

}  // namespace lambert
