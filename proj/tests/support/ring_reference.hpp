#pragma once

// Brute-force steady-state solve of all internal ring fields for the
// three-ring add-drop filter. Independent of the transfer-matrix cascade in
// the library: every coupler contributes its two scattering equations and
// every ring its two half-arc propagation equations, and the 14x14 complex
// system is solved directly per frequency.

#include <Eigen/Dense>
#include <complex>

#include "ccyopt/simulators.hpp"

namespace ccyopt::testing {

inline void ring_reference_response(const Vector& couplings, double frequency_ghz,
                                    double& through_power, double& drop_power) {
  using Complex = std::complex<double>;
  using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  const double fsr = device::ring_fsr_ghz();
  const double theta = 2.0 * 3.14159265358979323846 * frequency_ghz / fsr;
  const Complex h = std::polar(1.0, theta / 2.0);

  // unknowns per ring r=0..2: u_in, u_out, v_in, v_out (indices 4r..4r+3),
  // then through (12) and drop (13)
  auto u_in = [](int r) { return 4 * r; };
  auto u_out = [](int r) { return 4 * r + 1; };
  auto v_in = [](int r) { return 4 * r + 2; };
  auto v_out = [](int r) { return 4 * r + 3; };

  CMatrix a = CMatrix::Zero(14, 14);
  CVector b = CVector::Zero(14);
  int row = 0;
  double t[4];
  for (int j = 0; j < 4; ++j) t[j] = std::sqrt(1.0 - couplings[j] * couplings[j]);
  const Complex i_unit(0.0, 1.0);

  // half-arc propagation inside each ring
  for (int r = 0; r < 3; ++r) {
    a(row, v_in(r)) = 1.0;
    a(row, u_out(r)) = -h;
    ++row;
    a(row, u_in(r)) = 1.0;
    a(row, v_out(r)) = -h;
    ++row;
  }
  // coupler 0: bus input (unit amplitude) against ring 0
  a(row, 12) = 1.0;
  a(row, u_in(0)) = -i_unit * couplings[0];
  b(row) = t[0];
  ++row;
  a(row, u_out(0)) = 1.0;
  a(row, u_in(0)) = -t[0];
  b(row) = i_unit * couplings[0];
  ++row;
  // couplers 1, 2: ring j-1 against ring j
  for (int j = 1; j <= 2; ++j) {
    a(row, v_out(j - 1)) = 1.0;
    a(row, v_in(j - 1)) = -t[j];
    a(row, u_in(j)) = -i_unit * couplings[j];
    ++row;
    a(row, u_out(j)) = 1.0;
    a(row, v_in(j - 1)) = -i_unit * couplings[j];
    a(row, u_in(j)) = -t[j];
    ++row;
  }
  // coupler 3: ring 2 against the top bus (no top input)
  a(row, v_out(2)) = 1.0;
  a(row, v_in(2)) = -t[3];
  ++row;
  a(row, 13) = 1.0;
  a(row, v_in(2)) = -i_unit * couplings[3];
  ++row;

  const CVector solution = a.fullPivLu().solve(b);
  through_power = std::norm(solution(12));
  drop_power = std::norm(solution(13));
}

}  // namespace ccyopt::testing
