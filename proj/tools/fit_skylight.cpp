// Generates the bundled skylight fit: projects the analytic Preetham sky
// onto SH bands 0..6 over a (sun zenith, turbidity) grid and fits the
// (p_{l,m})_{i,j} polynomial tensor (degree 13 in theta_s, 7 in tau) that
// skylight_sh evaluates. Fitting runs in a Chebyshev basis for conditioning
// and converts back to raw monomial coefficients for the PSKY1 file.
//
// Usage: lambert_fit_skylight <output.psky>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambert/quadrature.hpp"
#include "lambert/sh.hpp"
#include "lambert/skylight.hpp"

using namespace lambert;

namespace {

constexpr double kPi = 3.14159265358979323846;
// Calibration range. The Perez zenith normalization 1 + A exp(B) crosses
// zero near tau = 1.65, so the model itself is only sane from about 2 up;
// below the range the polynomial extrapolates smoothly.
constexpr double kTauMin = 2.0;
constexpr double kTauMax = kSkylightTauMax;
constexpr double kThetaMax = kPi / 2.0;
// Normalizes zenith luminance (kcd/m^2) into O(1) rendering radiance.
constexpr double kRadianceScale = 0.12;

struct Perez {
  double a, b, c, d, e;
  double operator()(double cos_theta, double gamma) const {
    const double bb = std::min(b, -1e-3);  // keep the horizon exponent decaying
    return (1.0 + a * std::exp(bb / std::max(cos_theta, 1e-4))) *
           (1.0 + c * std::exp(d * gamma) + e * std::cos(gamma) * std::cos(gamma));
  }
};

Perez perez_luminance(double t) {
  return {0.1787 * t - 1.4630, -0.3554 * t + 0.4275, -0.0227 * t + 5.3251,
          0.1206 * t - 2.5771, -0.0670 * t + 0.3703};
}
Perez perez_chroma_x(double t) {
  return {-0.0193 * t - 0.2592, -0.0665 * t + 0.0008, -0.0004 * t + 0.2125,
          -0.0641 * t - 0.8989, -0.0033 * t + 0.0452};
}
Perez perez_chroma_y(double t) {
  return {-0.0167 * t - 0.2608, -0.0950 * t + 0.0092, -0.0079 * t + 0.2102,
          -0.0441 * t - 1.6537, -0.0109 * t + 0.0529};
}

double zenith_luminance(double t, double theta_s) {
  const double chi = (4.0 / 9.0 - t / 120.0) * (kPi - 2.0 * theta_s);
  return (4.0453 * t - 4.9710) * std::tan(chi) - 0.2155 * t + 2.4192;
}

double zenith_chroma(const double m[3][4], double t, double theta_s) {
  const double th2 = theta_s * theta_s, th3 = th2 * theta_s;
  double acc = 0.0;
  const double tp[3] = {t * t, t, 1.0};
  for (int r = 0; r < 3; ++r)
    acc += tp[r] * (m[r][0] * th3 + m[r][1] * th2 + m[r][2] * theta_s + m[r][3]);
  return acc;
}

constexpr double kZenithX[3][4] = {{0.00166, -0.00375, 0.00209, 0.0},
                                   {-0.02903, 0.06377, -0.03202, 0.00394},
                                   {0.11693, -0.21196, 0.06052, 0.25886}};
constexpr double kZenithY[3][4] = {{0.00275, -0.00610, 0.00317, 0.0},
                                   {-0.04214, 0.08970, -0.04153, 0.00516},
                                   {0.15346, -0.26756, 0.06670, 0.26688}};

// Linear-sRGB radiance of the Preetham sky seen along w, sun in the phi = 0
// half-plane. Zero below the horizon.
Vec3 sky_rgb(const Vec3& w, double theta_s, double tau) {
  if (w.z <= 0.0) return {};
  const Vec3 sun{std::sin(theta_s), 0.0, std::cos(theta_s)};
  const double cos_theta = w.z;
  const double gamma = std::acos(std::clamp(dot(w, sun), -1.0, 1.0));

  const Perez fy = perez_luminance(tau);
  const Perez fx = perez_chroma_x(tau);
  const Perez fyy = perez_chroma_y(tau);
  const double yz = std::max(0.0, zenith_luminance(tau, theta_s));
  const double lum = yz * fy(cos_theta, gamma) / fy(1.0, theta_s);
  const double cx = zenith_chroma(kZenithX, tau, theta_s) * fx(cos_theta, gamma) / fx(1.0, theta_s);
  const double cy = zenith_chroma(kZenithY, tau, theta_s) * fyy(cos_theta, gamma) / fyy(1.0, theta_s);

  const double y = std::max(1e-6, cy);
  const double big_y = std::max(0.0, lum) * kRadianceScale;
  const double big_x = big_y * cx / y;
  const double big_z = big_y * (1.0 - cx - cy) / y;
  const double r = 3.2406 * big_x - 1.5372 * big_y - 0.4986 * big_z;
  const double g = -0.9689 * big_x + 1.8758 * big_y + 0.0415 * big_z;
  const double b = 0.0557 * big_x - 0.2040 * big_y + 1.0570 * big_z;
  return {std::max(0.0, r), std::max(0.0, g), std::max(0.0, b)};
}

// SH projection of the sky with the sun at phi = 0; one (49 x 3) block.
std::vector<Vec3> project_sky(double theta_s, double tau, int theta_nodes = 64,
                              int phi_nodes = 128) {
  const int count = sh::coeff_count(kSkylightBands);
  std::vector<Vec3> coeffs(count, Vec3{});
  const GaussRule rule = gauss_legendre(theta_nodes);
  const double dphi = 2.0 * kPi / phi_nodes;
  std::vector<double> basis(count);
  for (int i = 0; i < theta_nodes; ++i) {
    const double ct = 0.5 * (rule.nodes[i] + 1.0);  // upper hemisphere only
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double w = 0.5 * rule.weights[i] * dphi;
    for (int j = 0; j < phi_nodes; ++j) {
      const double phi = (j + 0.5) * dphi;
      const Vec3 dir{st * std::cos(phi), st * std::sin(phi), ct};
      const Vec3 radiance = sky_rgb(dir, theta_s, tau);
      sh::basis_all(dir, kSkylightBands, basis);
      for (int k = 0; k < count; ++k) coeffs[k] += (w * basis[k]) * radiance;
    }
  }
  return coeffs;
}

// --- small polynomial helpers -------------------------------------------

// Chebyshev T_k as monomial coefficients in the scaled variable.
std::vector<std::vector<double>> chebyshev_monomials(int max_degree) {
  std::vector<std::vector<double>> t(max_degree + 1);
  t[0] = {1.0};
  if (max_degree >= 1) t[1] = {0.0, 1.0};
  for (int k = 2; k <= max_degree; ++k) {
    t[k].assign(k + 1, 0.0);
    for (int d = 0; d < k; ++d) t[k][d + 1] += 2.0 * t[k - 1][d];
    for (std::size_t d = 0; d < t[k - 2].size(); ++d) t[k][d] -= t[k - 2][d];
  }
  return t;
}

// Substitutes x_hat = alpha x + beta into a polynomial given in x_hat.
std::vector<double> substitute_affine(const std::vector<double>& coeff, double alpha,
                                      double beta) {
  std::vector<double> out(coeff.size(), 0.0);
  // binomial expansion of (alpha x + beta)^d, accumulated per degree
  for (std::size_t d = 0; d < coeff.size(); ++d) {
    if (coeff[d] == 0.0) continue;
    std::vector<double> pow_d = {1.0};
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> next(pow_d.size() + 1, 0.0);
      for (std::size_t i = 0; i < pow_d.size(); ++i) {
        next[i] += beta * pow_d[i];
        next[i + 1] += alpha * pow_d[i];
      }
      pow_d = std::move(next);
    }
    for (std::size_t i = 0; i < pow_d.size(); ++i) out[i] += coeff[d] * pow_d[i];
  }
  return out;
}

// Dense symmetric-positive-definite solve (normal equations are small).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> rhs, int n) {
  for (int i = 0; i < n; ++i) a[i * n + i] += 1e-12;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (int k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    double sum = rhs[i];
    for (int k = 0; k < i; ++k) sum -= a[i * n + k] * rhs[k];
    rhs[i] = sum / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = rhs[i];
    for (int k = i + 1; k < n; ++k) sum -= a[k * n + i] * rhs[k];
    rhs[i] = sum / a[i * n + i];
  }
  return rhs;
}

double chebyshev_node(int k, int n, double lo, double hi) {
  const double x = std::cos(kPi * (k + 0.5) / n);  // in (-1, 1)
  return lo + (hi - lo) * 0.5 * (x + 1.0);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "preetham.psky";
  const int n_theta = 28, n_tau = 16;
  const int terms = kSkylightThetaPowers * kSkylightTauPowers;  // 112
  const int count = sh::coeff_count(kSkylightBands);            // 49

  // Sample grid and targets.
  std::vector<double> thetas(n_theta), taus(n_tau);
  for (int k = 0; k < n_theta; ++k) thetas[k] = chebyshev_node(k, n_theta, 0.0, kThetaMax);
  for (int k = 0; k < n_tau; ++k) taus[k] = chebyshev_node(k, n_tau, kTauMin, kTauMax);

  const int rows = n_theta * n_tau;
  std::vector<double> design(static_cast<std::size_t>(rows) * terms);
  std::vector<Vec3> targets(static_cast<std::size_t>(rows) * count);

  const auto cheb_theta = chebyshev_monomials(kSkylightThetaPowers - 1);
  const auto cheb_tau = chebyshev_monomials(kSkylightTauPowers - 1);
  auto cheb_eval = [](const std::vector<double>& mono, double x_hat) {
    double v = 0.0;
    for (std::size_t d = mono.size(); d-- > 0;) v = v * x_hat + mono[d];
    return v;
  };

  std::printf("sampling %d x %d Preetham projections...\n", n_theta, n_tau);
  for (int a = 0; a < n_theta; ++a) {
    for (int b = 0; b < n_tau; ++b) {
      const int row = a * n_tau + b;
      const double th_hat = 2.0 * thetas[a] / kThetaMax - 1.0;
      const double ta_hat = (2.0 * taus[b] - (kTauMin + kTauMax)) / (kTauMax - kTauMin);
      for (int i = 0; i < kSkylightThetaPowers; ++i)
        for (int j = 0; j < kSkylightTauPowers; ++j)
          design[static_cast<std::size_t>(row) * terms + i * kSkylightTauPowers + j] =
              cheb_eval(cheb_theta[i], th_hat) * cheb_eval(cheb_tau[j], ta_hat);
      const std::vector<Vec3> proj = project_sky(thetas[a], taus[b]);
      for (int k = 0; k < count; ++k) targets[static_cast<std::size_t>(row) * count + k] = proj[k];
    }
  }

  // Conversion of scaled-Chebyshev coefficients to raw monomials.
  std::vector<std::vector<double>> theta_mono(kSkylightThetaPowers), tau_mono(kSkylightTauPowers);
  for (int i = 0; i < kSkylightThetaPowers; ++i)
    theta_mono[i] = substitute_affine(cheb_theta[i], 2.0 / kThetaMax, -1.0);
  for (int j = 0; j < kSkylightTauPowers; ++j)
    tau_mono[j] = substitute_affine(cheb_tau[j], 2.0 / (kTauMax - kTauMin),
                                    -(kTauMin + kTauMax) / (kTauMax - kTauMin));

  // Normal equations, shared across all 49 x 3 right-hand sides. A ridge on
  // the RAW monomial coefficients keeps the shipped tensor cancellation-free:
  // a shifted Chebyshev polynomial of degree 13 expands to monomials ~1e9 in
  // size that cancel to O(1), which would drown finite differences of the
  // evaluated polynomial in roundoff. The penalty trades a little residual
  // for small raw coefficients.
  std::printf("solving least squares (%d rows, %d terms)...\n", rows, terms);
  const double lambda = 1e-8;
  std::vector<double> gram(static_cast<std::size_t>(terms) * terms, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* d = design.data() + static_cast<std::size_t>(r) * terms;
    for (int i = 0; i < terms; ++i)
      for (int j = 0; j <= i; ++j) gram[static_cast<std::size_t>(i) * terms + j] += d[i] * d[j];
  }
  for (int i = 0; i < terms; ++i)
    for (int j = i + 1; j < terms; ++j)
      gram[static_cast<std::size_t>(i) * terms + j] = gram[static_cast<std::size_t>(j) * terms + i];
  {
    // M maps Chebyshev coefficients to raw monomials; add lambda M^T M.
    // Scale the penalty per raw power so every term is judged by its size
    // at the domain corner (theta_max, tau_max) where cancellation bites.
    std::vector<double> m(static_cast<std::size_t>(terms) * terms, 0.0);
    for (int ic = 0; ic < kSkylightThetaPowers; ++ic) {
      for (int jc = 0; jc < kSkylightTauPowers; ++jc) {
        const int col = ic * kSkylightTauPowers + jc;
        for (std::size_t ir = 0; ir < theta_mono[ic].size(); ++ir) {
          for (std::size_t jr = 0; jr < tau_mono[jc].size(); ++jr) {
            const int row = static_cast<int>(ir) * kSkylightTauPowers + static_cast<int>(jr);
            const double corner = std::pow(kThetaMax, static_cast<double>(ir)) *
                                  std::pow(kTauMax, static_cast<double>(jr));
            m[static_cast<std::size_t>(row) * terms + col] +=
                theta_mono[ic][ir] * tau_mono[jc][jr] * corner;
          }
        }
      }
    }
    for (int i = 0; i < terms; ++i)
      for (int j = 0; j < terms; ++j) {
        double acc = 0.0;
        for (int k = 0; k < terms; ++k)
          acc += m[static_cast<std::size_t>(k) * terms + i] *
                 m[static_cast<std::size_t>(k) * terms + j];
        gram[static_cast<std::size_t>(i) * terms + j] += lambda * acc;
      }
  }

  SkylightFit fit;
  fit.p.assign(SkylightFit::size(), 0.0);
  for (int k = 0; k < count; ++k) {
    for (int ch = 0; ch < 3; ++ch) {
      std::vector<double> rhs(terms, 0.0);
      for (int r = 0; r < rows; ++r) {
        const double* d = design.data() + static_cast<std::size_t>(r) * terms;
        const double y = targets[static_cast<std::size_t>(r) * count + k][ch];
        for (int i = 0; i < terms; ++i) rhs[i] += d[i] * y;
      }
      const std::vector<double> cheb_coeffs = cholesky_solve(gram, rhs, terms);
      // Accumulate into raw monomial powers.
      for (int i = 0; i < kSkylightThetaPowers; ++i) {
        for (int j = 0; j < kSkylightTauPowers; ++j) {
          const double c = cheb_coeffs[i * kSkylightTauPowers + j];
          if (c == 0.0) continue;
          for (std::size_t di = 0; di < theta_mono[i].size(); ++di) {
            if (theta_mono[i][di] == 0.0) continue;
            for (std::size_t dj = 0; dj < tau_mono[j].size(); ++dj) {
              fit.at(k, static_cast<int>(di), static_cast<int>(dj), ch) +=
                  c * theta_mono[i][di] * tau_mono[j][dj];
            }
          }
        }
      }
    }
  }

  save_skylight_fit(fit, out_path);
  const SkylightFit reloaded = load_skylight_fit(out_path);
  std::printf("wrote %s (checksum %016llx)\n", out_path.c_str(),
              static_cast<unsigned long long>(reloaded.checksum));

  // Evaluation conditioning: sum of |term| at the domain corner, the scale
  // of roundoff that finite differences of the polynomial must live with.
  double cond = 0.0;
  for (int k = 0; k < count; ++k)
    for (int ch = 0; ch < 3; ++ch)
      for (int i = 0; i < kSkylightThetaPowers; ++i)
        for (int j = 0; j < kSkylightTauPowers; ++j)
          cond = std::max(cond, std::fabs(fit.at(k, i, j, ch)) * std::pow(kThetaMax, i) *
                                    std::pow(kTauMax, j));
  std::printf("max |term| at domain corner: %.3e\n", cond);

  // Verification pass on an interior grid the fit never saw.
  double worst = 0.0, worst_amp = 0.0;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 5; ++b) {
      const double th = (a + 0.5) * kThetaMax / 7.0;
      const double ta = kTauMin + (b + 0.5) * (kTauMax - kTauMin) / 5.0;
      const std::vector<Vec3> direct = project_sky(th, ta);
      const ShCoeffs poly = skylight_sh({th, 0.0, ta}, reloaded);
      for (int k = 0; k < count; ++k) {
        for (int ch = 0; ch < 3; ++ch) {
          worst = std::max(worst, std::fabs(direct[k][ch] - poly.at(k, ch)));
          worst_amp = std::max(worst_amp, std::fabs(direct[k][ch]));
        }
      }
    }
  }
  std::printf("verification: max |fit - direct| = %.3e (max coeff %.3f)\n", worst, worst_amp);

  // Pin down the azimuth convention of the rotation formula.
  const double th = 0.8, ta = 3.0, phis = 0.9;
  const ShCoeffs rotated = skylight_sh({th, phis, ta}, reloaded);
  auto direct_at = [&](double sun_azimuth) {
    const int theta_nodes = 64, phi_nodes = 128;
    std::vector<double> basis(count);
    ShCoeffs coeffs(kSkylightBands);
    const GaussRule rule = gauss_legendre(theta_nodes);
    const double dphi = 2.0 * kPi / phi_nodes;
    for (int i = 0; i < theta_nodes; ++i) {
      const double ct = 0.5 * (rule.nodes[i] + 1.0);
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      const double w = 0.5 * rule.weights[i] * dphi;
      for (int j = 0; j < phi_nodes; ++j) {
        const double phi = (j + 0.5) * dphi;
        const Vec3 dir{st * std::cos(phi), st * std::sin(phi), ct};
        // rotate the query into the sun-at-zero frame
        const Vec3 local{st * std::cos(phi - sun_azimuth), st * std::sin(phi - sun_azimuth), ct};
        const Vec3 radiance = sky_rgb(local, th, ta);
        sh::basis_all(dir, kSkylightBands, basis);
        for (int k = 0; k < count; ++k)
          for (int ch = 0; ch < 3; ++ch) coeffs.at(k, ch) += w * basis[k] * radiance[ch];
      }
    }
    return coeffs;
  };
  for (const double sense : {+1.0, -1.0}) {
    const ShCoeffs direct = direct_at(sense * phis);
    double err = 0.0;
    for (std::size_t i = 0; i < direct.data.size(); ++i)
      err = std::max(err, std::fabs(direct.data[i] - rotated.data[i]));
    std::printf("sun at %+0.1f * phi_s: max coeff mismatch %.3e\n", sense, err);
  }
  return 0;
}
