#pragma once

// Heavy symmetric (Lagrange) top: parameters, body-frame state, the
// Euler-Poisson vector field and its four first integrals.
//
// Units are SI. The body frame has principal axes of inertia with
// I = diag(A, A, C) and the center of gravity at (0, 0, z).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lagrange_top {

using Vec3 = std::array<double, 3>;

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline constexpr double dot(const Vec3& a, const Vec3& b) noexcept {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

/// Physical constants of a symmetric top. Construction validates the
/// positivity assumptions; C > 2A is accepted but reported through
/// violates_triangle_inequality().
class TopParams {
 public:
  TopParams(double A, double C, double m, double g, double z)
      : A_(A), C_(C), m_(m), g_(g), z_(z) {
    check_positive("A", A);
    check_positive("C", C);
    check_positive("m", m);
    check_positive("g", g);
    check_positive("z", z);
  }

  double A() const noexcept { return A_; }
  double C() const noexcept { return C_; }
  double m() const noexcept { return m_; }
  double g() const noexcept { return g_; }
  double z() const noexcept { return z_; }

  /// m*g*z, the gravitational torque scale (J).
  double mgz() const noexcept { return m_ * g_ * z_; }

  /// Critical spin 2*sqrt(A*m*g*z) separating unstable from stable
  /// vertical rotation (kg*m^2/s).
  double threshold() const noexcept { return 2.0 * std::sqrt(A_ * mgz()); }

  bool violates_triangle_inequality() const noexcept { return C_ > 2.0 * A_; }

  /// Angular velocity from angular momentum, I^-1 M.
  Vec3 angular_velocity(const Vec3& M) const noexcept {
    return {M[0] / A_, M[1] / A_, M[2] / C_};
  }

 private:
  static void check_positive(const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("top parameter ") + name +
                                  " must be finite and > 0, got " +
                                  std::to_string(value));
    }
  }

  double A_, C_, m_, g_, z_;
};

/// Body-frame state: angular momentum M and gravity direction gamma.
/// gamma is expected to have unit length at construction time but is not
/// renormalized by the dynamics.
struct TopState {
  Vec3 M{};
  Vec3 gamma{};

  static constexpr std::size_t kDim = 6;

  std::array<double, kDim> as_array() const noexcept {
    return {M[0], M[1], M[2], gamma[0], gamma[1], gamma[2]};
  }
  static TopState from_array(const std::array<double, kDim>& x) noexcept {
    return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
  }

  bool is_finite() const noexcept {
    for (double x : as_array()) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  friend bool operator==(const TopState&, const TopState&) = default;
};

using StateDerivative = TopState;

/// Componentwise a + s*b.
inline TopState axpy(const TopState& a, double s, const TopState& b) noexcept {
  TopState out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.M[i] = a.M[i] + s * b.M[i];
    out.gamma[i] = a.gamma[i] + s * b.gamma[i];
  }
  return out;
}

/// Euclidean distance in R^6.
inline double distance(const TopState& a, const TopState& b) noexcept {
  double s = 0.0;
  const auto x = a.as_array();
  const auto y = b.as_array();
  for (std::size_t i = 0; i < TopState::kDim; ++i) {
    s += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return std::sqrt(s);
}

/// The four first integrals of the Euler-Poisson system.
struct ConservedSet {
  double H = 0.0;   ///< energy (J)
  double C1 = 0.0;  ///< |gamma|^2
  double C2 = 0.0;  ///< M . gamma (kg*m^2/s)
  double F = 0.0;   ///< M3 (kg*m^2/s)

  std::array<double, 4> as_array() const noexcept { return {H, C1, C2, F}; }

  friend ConservedSet operator-(const ConservedSet& a, const ConservedSet& b) noexcept {
    return {a.H - b.H, a.C1 - b.C1, a.C2 - b.C2, a.F - b.F};
  }
  friend bool operator==(const ConservedSet&, const ConservedSet&) = default;
};

/// Euler-Poisson vector field
///   dM/dt     = M x I^-1 M + m g gamma x r_G
///   dgamma/dt = gamma x I^-1 M
///
/// For A = B the third momentum component has zero derivative; it is
/// written as an exact zero so that F = M3 is conserved bit-for-bit.
inline StateDerivative rhs(const TopParams& p, const TopState& s) noexcept {
  const Vec3& M = s.M;
  const Vec3& gam = s.gamma;
  const Vec3 omega = p.angular_velocity(M);
  const double mgz = p.mgz();
  const double spin_coupling = M[2] * (1.0 / p.C() - 1.0 / p.A());

  StateDerivative d;
  d.M = {M[1] * spin_coupling + mgz * gam[1],
         -M[0] * spin_coupling - mgz * gam[0],
         0.0};
  d.gamma = cross(gam, omega);
  return d;
}

inline ConservedSet conserved(const TopParams& p, const TopState& s) noexcept {
  const Vec3& M = s.M;
  const Vec3& gam = s.gamma;
  ConservedSet c;
  c.H = 0.5 * (M[0] * M[0] / p.A() + M[1] * M[1] / p.A() + M[2] * M[2] / p.C()) +
        p.mgz() * gam[2];
  c.C1 = dot(gam, gam);
  c.C2 = dot(M, gam);
  c.F = M[2];
  return c;
}

/// Vertical uniform rotation (0, 0, M3, 0, 0, 1).
inline constexpr TopState equilibrium(double M3) noexcept {
  return {{0.0, 0.0, M3}, {0.0, 0.0, 1.0}};
}

/// Spin angular momentum for a spin rate omega about the symmetry axis.
inline double m3_from_omega(const TopParams& p, double omega) noexcept {
  return p.C() * omega;
}

/// M3^2 - 4 A m g z. Non-negative exactly when the vertical rotation is
/// Lyapunov stable.
inline double threshold_margin(const TopParams& p, double M3) noexcept {
  return M3 * M3 - 4.0 * p.A() * p.mgz();
}

}  // namespace lagrange_top
