#pragma once

#include "bbsim/converter.hpp"

namespace bbsim {

// One classical fixed-step RK4 step of dx/dt = a*x + b. On a linear system
// this equals the degree-4 Taylor polynomial of the matrix exponential.
// Throws SimError if the result is non-finite.
StateVector rk4_step(const AffineSystem& sys, const StateVector& s, double dt);

// Exact propagation of the affine system over dt:
//   x(dt) = e^{A dt} x0 + dt * phi1(A dt) b,   phi1(z) = (e^z - 1)/z.
// Both matrix functions are evaluated in closed form from the eigenvalues of
// the 2x2 matrix, with series fallbacks for near-equal/defective spectra.
// Valid for any A including singular and zero (pure integrator).
StateVector exact_step(const AffineSystem& sys, const StateVector& s, double dt);

}  // namespace bbsim
