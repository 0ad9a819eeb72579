#include "lambert/skylight.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lambert {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr char kMagic[5] = {'P', 'S', 'K', 'Y', '1'};

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

static_assert(sizeof(double) == 8);

}  // namespace

SkylightParams SkylightParams::clamped() const {
  SkylightParams out = *this;
  out.theta_s = std::clamp(out.theta_s, 0.0, kPi / 2.0);
  out.turbidity = std::clamp(out.turbidity, 1.0, kSkylightTauMax);
  out.phi_s = std::fmod(out.phi_s, 2.0 * kPi);
  if (out.phi_s < 0.0) out.phi_s += 2.0 * kPi;
  return out;
}

SkylightFit load_skylight_fit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open skylight fit " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error(path + ": not a PSKY1 file");
  SkylightFit fit;
  fit.p.resize(SkylightFit::size());
  in.read(reinterpret_cast<char*>(fit.p.data()),
          static_cast<std::streamsize>(fit.p.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated PSKY1 tensor");
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : fit.p) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(&v, &bits, 8);
    }
  }
  for (double v : fit.p)
    if (!std::isfinite(v)) throw std::runtime_error(path + ": non-finite fit entry");
  fit.checksum = fnv1a(reinterpret_cast<const unsigned char*>(fit.p.data()),
                       fit.p.size() * sizeof(double));
  return fit;
}

void save_skylight_fit(const SkylightFit& fit, const std::string& path) {
  if (fit.p.size() != SkylightFit::size())
    throw std::invalid_argument("skylight fit tensor has wrong size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 5);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(fit.p.data()),
              static_cast<std::streamsize>(fit.p.size() * sizeof(double)));
  } else {
    for (double v : fit.p) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
}

namespace {

struct PolyEval {
  double value;
  double d_theta;
  double d_tau;
};

// U~_{l,m} and its partials at (theta_s, tau); powers are evaluated
// iteratively so theta_s = 0 and tau = 0 stay well defined.
PolyEval eval_tilde(const SkylightFit& fit, int flat, int channel, double theta,
                    double tau) {
  double theta_pow[kSkylightThetaPowers];
  double tau_pow[kSkylightTauPowers];
  theta_pow[0] = 1.0;
  for (int i = 1; i < kSkylightThetaPowers; ++i) theta_pow[i] = theta_pow[i - 1] * theta;
  tau_pow[0] = 1.0;
  for (int j = 1; j < kSkylightTauPowers; ++j) tau_pow[j] = tau_pow[j - 1] * tau;

  PolyEval out{0.0, 0.0, 0.0};
  for (int i = 0; i < kSkylightThetaPowers; ++i) {
    for (int j = 0; j < kSkylightTauPowers; ++j) {
      const double c = fit.at(flat, i, j, channel);
      out.value += c * theta_pow[i] * tau_pow[j];
      if (i > 0) out.d_theta += c * i * theta_pow[i - 1] * tau_pow[j];
      if (j > 0) out.d_tau += c * j * theta_pow[i] * tau_pow[j - 1];
    }
  }
  return out;
}

void check_fit(const SkylightFit& fit) {
  if (fit.p.size() != SkylightFit::size())
    throw std::runtime_error("skylight fit missing or malformed");
}

}  // namespace

ShCoeffs skylight_sh(const SkylightParams& params, const SkylightFit& fit) {
  check_fit(fit);
  ShCoeffs out(kSkylightBands);
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l <= kSkylightBands; ++l) {
      for (int m = -l; m <= l; ++m) {
        const PolyEval pos = eval_tilde(fit, sh::index(l, m), c, params.theta_s, params.turbidity);
        const PolyEval neg = eval_tilde(fit, sh::index(l, -m), c, params.theta_s, params.turbidity);
        out.at(l, m, c) =
            pos.value * std::cos(m * params.phi_s) + neg.value * std::sin(m * params.phi_s);
      }
    }
  }
  return out;
}

SkylightGrad skylight_sh_grad(const SkylightParams& params, const SkylightFit& fit) {
  check_fit(fit);
  SkylightGrad out{ShCoeffs(kSkylightBands), ShCoeffs(kSkylightBands), ShCoeffs(kSkylightBands)};
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l <= kSkylightBands; ++l) {
      for (int m = -l; m <= l; ++m) {
        const PolyEval pos = eval_tilde(fit, sh::index(l, m), c, params.theta_s, params.turbidity);
        const PolyEval neg = eval_tilde(fit, sh::index(l, -m), c, params.theta_s, params.turbidity);
        const double cm = std::cos(m * params.phi_s);
        const double sm = std::sin(m * params.phi_s);
        out.d_theta.at(l, m, c) = pos.d_theta * cm + neg.d_theta * sm;
        out.d_phi.at(l, m, c) = -m * pos.value * sm + m * neg.value * cm;
        out.d_tau.at(l, m, c) = pos.d_tau * cm + neg.d_tau * sm;
      }
    }
  }
  return out;
}

}  // namespace lambert
