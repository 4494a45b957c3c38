#include "bbsim/integrators.hpp"

#include <complex>

namespace bbsim {

namespace {

StateVector advanced(const StateVector& s, const StateDerivative& d, double h) {
  return {s.i_l + h * d.d_i_l, s.v_c + h * d.d_v_c};
}

using cplx = std::complex<double>;

// sinh(z)/z, stable at z = 0.
cplx sinch(cplx z) {
  if (std::abs(z) < 1e-2) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
  }
  return std::sinh(z) / z;
}

// phi1(z) = (e^z - 1)/z, series below |z| = 0.25 to avoid cancellation.
cplx phi1(cplx z) {
  if (std::abs(z) < 0.25) {
    cplx sum = 1.0;
    cplx term = 1.0;
    for (int k = 2; k <= 16; ++k) {
      term *= z / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// d/dz phi1(z) = (e^z (z - 1) + 1) / z^2, series near zero.
cplx phi1_deriv(cplx z) {
  if (std::abs(z) < 0.25) {
    // sum_{k>=1} k z^{k-1} / (k+1)!
    cplx sum = 0.5;
    cplx zk = 1.0;
    double fact = 2.0;  // (k+1)! running value, starts at 2! for k = 1
    for (int k = 2; k <= 16; ++k) {
      zk *= z;
      fact *= static_cast<double>(k + 1);
      sum += static_cast<double>(k) * zk / fact;
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

StateVector rk4_step(const AffineSystem& sys, const StateVector& s, double dt) {
  const StateDerivative k1 = sys.rhs(s);
  const StateDerivative k2 = sys.rhs(advanced(s, k1, 0.5 * dt));
  const StateDerivative k3 = sys.rhs(advanced(s, k2, 0.5 * dt));
  const StateDerivative k4 = sys.rhs(advanced(s, k3, dt));
  StateVector out{
      s.i_l + dt / 6.0 * (k1.d_i_l + 2.0 * k2.d_i_l + 2.0 * k3.d_i_l + k4.d_i_l),
      s.v_c + dt / 6.0 * (k1.d_v_c + 2.0 * k2.d_v_c + 2.0 * k3.d_v_c + k4.d_v_c)};
  if (!out.finite()) {
    throw SimError("rk4_step produced a non-finite state");
  }
  return out;
}

StateVector exact_step(const AffineSystem& sys, const StateVector& s, double dt) {
  // Eigenvalues of M = A*dt. For a real 2x2 matrix any analytic f(M) equals
  // the interpolation polynomial through the spectrum:
  //   f(M) = mean(f(mu1), f(mu2)) I + dd * (M - mid I)
  // with dd the divided difference and mid the eigenvalue midpoint. The
  // exponential uses exp(mid)cosh(h) / exp(mid)sinch(h) which stays accurate
  // as mu1 -> mu2 (defective case included); phi1 switches to its derivative.
  const double m00 = sys.a00 * dt, m01 = sys.a01 * dt;
  const double m10 = sys.a10 * dt, m11 = sys.a11 * dt;
  const double tr = m00 + m11;
  const double det = m00 * m11 - m01 * m10;
  const cplx rad = std::sqrt(cplx(tr * tr - 4.0 * det, 0.0));
  const cplx mu1 = 0.5 * (tr + rad);
  const cplx mu2 = 0.5 * (tr - rad);
  const cplx mid = 0.5 * (mu1 + mu2);
  const cplx half = 0.5 * (mu1 - mu2);

  const cplx exp_mid = std::exp(mid);
  const cplx e_mean = exp_mid * std::cosh(half);
  const cplx e_dd = exp_mid * sinch(half);

  const cplx p1 = phi1(mu1);
  const cplx p2 = phi1(mu2);
  const cplx p_mean = 0.5 * (p1 + p2);
  const double scale = 1.0 + std::abs(mu1) + std::abs(mu2);
  const cplx p_dd =
      std::abs(mu1 - mu2) > 1e-5 * scale ? (p1 - p2) / (mu1 - mu2) : phi1_deriv(mid);

  // f(M) entries: f_mean I + f_dd (M - mid I). Imaginary parts cancel for
  // real M; drop the O(eps) residue.
  auto assemble = [&](cplx mean, cplx dd, double out[4]) {
    out[0] = (mean + dd * (cplx(m00) - mid)).real();
    out[1] = (dd * m01).real();
    out[2] = (dd * m10).real();
    out[3] = (mean + dd * (cplx(m11) - mid)).real();
  };
  double E[4], P[4];
  assemble(e_mean, e_dd, E);
  assemble(p_mean, p_dd, P);

  StateVector out{
      E[0] * s.i_l + E[1] * s.v_c + dt * (P[0] * sys.b0 + P[1] * sys.b1),
      E[2] * s.i_l + E[3] * s.v_c + dt * (P[2] * sys.b0 + P[3] * sys.b1)};
  if (!out.finite()) {
    throw SimError("exact_step produced a non-finite state");
  }
  return out;
}

}  // namespace bbsim
