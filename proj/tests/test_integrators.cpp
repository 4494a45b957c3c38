#include <doctest.h>

#include <cmath>
#include <random>

#include "bbsim/converter.hpp"
#include "bbsim/integrators.hpp"

using namespace bbsim;

namespace {

AffineSystem scalar_decay(double lambda) {
  AffineSystem sys;
  sys.a00 = lambda;
  return sys;
}

// Undamped/damped rotation: eigenvalues sigma +/- i*omega, closed-form
// exponential e^{sigma t} R(omega t).
AffineSystem spiral(double sigma, double omega) {
  AffineSystem sys;
  sys.a00 = sigma;
  sys.a01 = omega;
  sys.a10 = -omega;
  sys.a11 = sigma;
  return sys;
}

AffineSystem random_system(std::mt19937& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  AffineSystem sys;
  sys.a00 = coef(rng);
  sys.a01 = coef(rng);
  sys.a10 = coef(rng);
  sys.a11 = coef(rng);
  sys.b0 = coef(rng);
  sys.b1 = coef(rng);
  return sys;
}

double state_dist(const StateVector& a, const StateVector& b) {
  return std::hypot(a.i_l - b.i_l, a.v_c - b.v_c);
}

}  // namespace

TEST_CASE("rk4 on scalar decay reproduces the degree-4 Taylor polynomial") {
  const StateVector out = rk4_step(scalar_decay(-1.0), {1.0, 0.0}, 0.1);
  // 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1.
  CHECK(out.i_l == doctest::Approx(0.9048375000000001).epsilon(1e-12));
  CHECK(std::abs(out.i_l - std::exp(-0.1)) <= 1e-7);
  CHECK(out.v_c == 0.0);
}

TEST_CASE("exact step matches the scalar exponential to machine precision") {
  const StateVector out = exact_step(scalar_decay(-1.0), {1.0, 0.0}, 0.1);
  CHECK(out.i_l == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
  CHECK(out.v_c == 0.0);
}

TEST_CASE("exact step on a pure integrator") {
  AffineSystem sys;  // A = 0, constant drive
  sys.b0 = 2.0;
  sys.b1 = -3.0;
  const StateVector out = exact_step(sys, {1.0, 1.0}, 0.25);
  CHECK(out.i_l == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(out.v_c == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("exact step on a rotation tracks cos/sin") {
  const double w = 3.0;
  const double dt = 0.4;
  const StateVector out = exact_step(spiral(0.0, w), {1.0, 0.0}, dt);
  CHECK(out.i_l == doctest::Approx(std::cos(w * dt)).epsilon(1e-13));
  CHECK(out.v_c == doctest::Approx(-std::sin(w * dt)).epsilon(1e-13));
}

TEST_CASE("exact step on a damped spiral") {
  const double s = -0.7, w = 2.3, dt = 0.5;
  const StateVector out = exact_step(spiral(s, w), {0.3, -1.1}, dt);
  const double e = std::exp(s * dt), cw = std::cos(w * dt), sw = std::sin(w * dt);
  CHECK(out.i_l == doctest::Approx(e * (cw * 0.3 + sw * -1.1)).epsilon(1e-13));
  CHECK(out.v_c == doctest::Approx(e * (-sw * 0.3 + cw * -1.1)).epsilon(1e-13));
}

TEST_CASE("exact step on a defective matrix (repeated eigenvalue)") {
  // A = [[l, 1], [0, l]] has exp(A t) = e^{lt} [[1, t], [0, 1]].
  const double l = -0.5, dt = 0.8;
  AffineSystem sys;
  sys.a00 = l;
  sys.a01 = 1.0;
  sys.a11 = l;
  const StateVector out = exact_step(sys, {2.0, 3.0}, dt);
  const double e = std::exp(l * dt);
  CHECK(out.i_l == doctest::Approx(e * (2.0 + dt * 3.0)).epsilon(1e-12));
  CHECK(out.v_c == doctest::Approx(e * 3.0).epsilon(1e-12));
}

TEST_CASE("exact step is a semigroup: composing sub-steps equals one step") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const AffineSystem sys = random_system(rng);
    const StateVector s0{val(rng), val(rng)};
    const double dt = 0.5;
    const double a = frac(rng) * dt;
    const StateVector whole = exact_step(sys, s0, dt);
    const StateVector split = exact_step(sys, exact_step(sys, s0, a), dt - a);
    const double scale = 1.0 + std::abs(whole.i_l) + std::abs(whole.v_c);
    CHECK(state_dist(whole, split) <= 1e-11 * scale);
  }
}

TEST_CASE("both integrators hold an affine equilibrium fixed") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const AffineSystem sys = random_system(rng);
    const double det = sys.a00 * sys.a11 - sys.a01 * sys.a10;
    if (std::abs(det) < 0.1) continue;  // skip near-singular draws
    // x* = -A^{-1} b.
    const StateVector eq{-(sys.a11 * sys.b0 - sys.a01 * sys.b1) / det,
                         -(-sys.a10 * sys.b0 + sys.a00 * sys.b1) / det};
    const double scale = 1.0 + std::abs(eq.i_l) + std::abs(eq.v_c);
    CHECK(state_dist(rk4_step(sys, eq, 0.3), eq) <= 1e-12 * scale);
    CHECK(state_dist(exact_step(sys, eq, 0.3), eq) <= 1e-11 * scale);
  }
}

TEST_CASE("rk4 converges at fourth order toward the exact propagator") {
  const AffineSystem sys = spiral(-0.4, 2.0);
  const StateVector s0{1.0, 0.5};
  const double horizon = 1.0;

  auto global_error = [&](int n) {
    const double h = horizon / n;
    StateVector s = s0;
    for (int i = 0; i < n; ++i) s = rk4_step(sys, s, h);
    return state_dist(s, exact_step(sys, s0, horizon));
  };

  const double e16 = global_error(16);
  const double e32 = global_error(32);
  const double e64 = global_error(64);
  // Successive halvings should shrink the error by about 2^4.
  CHECK(e16 / e32 == doctest::Approx(16.0).epsilon(0.2));
  CHECK(e32 / e64 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("integrator routes agree on the converter phases") {
  ConverterParams p;
  p.vin = 2.5;
  p.l = 280e-9;
  p.c = 250e-9;
  p.r_l = 0.5;
  p.r_esr = 1e-4;
  const double h = p.period() / 64.0;
  const StateVector s{1.0, 3.24};
  for (Phase ph : {Phase::On, Phase::Off}) {
    const AffineSystem sys = phase_affine(p, ph);
    const StateVector a = rk4_step(sys, s, h);
    const StateVector b = exact_step(sys, s, h);
    CHECK(state_dist(a, b) <= 1e-10 * (1.0 + std::abs(b.i_l) + std::abs(b.v_c)));
  }
}

TEST_CASE("non-finite results are reported, not returned") {
  AffineSystem sys;
  sys.a00 = 1e200;
  CHECK_THROWS_AS(rk4_step(sys, {1.0, 0.0}, 1e200), SimError);
  CHECK_THROWS_AS(exact_step(sys, {1.0, 0.0}, 1e200), SimError);
}
