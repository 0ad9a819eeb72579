#pragma once

#include <span>
#include <vector>

#include "lambert/vec.hpp"

// Real spherical harmonics with the Condon-Shortley phase kept inside the
// associated Legendre polynomials and an extra (-1)^m sqrt(2) factor on the
// m != 0 bases. That combination reproduces the usual graphics convention
// (Y_{1,-1} ~ y, Y_{1,0} ~ z, Y_{1,1} ~ x, all with positive sign).
namespace lambert::sh {

// Bands above this are out of scope for the renderer.
inline constexpr int kMaxBand = 16;

// Flattened coefficient index; a bijection [0,(n+1)^2) for |m| <= l <= n.
constexpr int index(int l, int m) { return l * (l + 1) + m; }
constexpr int coeff_count(int bands) { return (bands + 1) * (bands + 1); }

// Legendre polynomial P_l(x) by upward recurrence.
double legendre(int l, double x);

// Associated Legendre P_l^m(x), 0 <= m <= l, Condon-Shortley phase included.
double assoc_legendre(int l, int m, double x);

// Real SH basis Y_l^m evaluated at a unit direction.
double basis(int l, int m, const Vec3& dir);

// All bases with l <= bands at once; out must hold coeff_count(bands) values
// in index(l,m) order.
void basis_all(const Vec3& dir, int bands, std::span<double> out);
std::vector<double> basis_all(const Vec3& dir, int bands);

// Polar-angle Jacobians of theta = acos(n_z), phi = atan2(n_y, n_x) for a
// unit normal. Singular on the z axis.
Vec3 theta_grad(const Vec3& n);
Vec3 phi_grad(const Vec3& n);

// Behaviour of the basis gradient when sin(theta) falls below the pole
// tolerance: kError throws for bases that need the phi chain, kClamp zeroes
// the phi-chain term (the m = 0 limit is exact, m != 0 values are damped but
// finite, which is what the shading path wants for axis-aligned faces).
enum class PoleMode { kError, kClamp };

inline constexpr double kPoleSinTolerance = 1e-8;

// Gradient of Y_l^m with respect to the (unit) normal; tangent to the sphere.
Vec3 basis_grad(int l, int m, const Vec3& n, PoleMode mode = PoleMode::kError);

// All gradients with l <= bands, in index(l,m) order.
void basis_grad_all(const Vec3& n, int bands, std::span<Vec3> out,
                    PoleMode mode = PoleMode::kError);
std::vector<Vec3> basis_grad_all(const Vec3& n, int bands,
                                 PoleMode mode = PoleMode::kError);

}  // namespace lambert::sh
