#pragma once

#include <functional>
#include <string>

#include "kkflow/geometry.hpp"

namespace kkflow {

// Point of the reduced phase space. q is the conserved vertical momentum p_4,
// a parameter of the reduced system.
struct PhaseState {
  Vec3 x{};
  Vec3 Pi{};
  double q = 0.0;
};

struct EomRhs {
  Vec3 dx{};
  Vec3 dPi{};
};

// H = 1/2 g^{ij} Pi_i Pi_j + q^2/2h + U with g^{ij} = delta^{ij}/f.
double hamiltonian(const PhaseState& state, const MetricSpec& spec);

// dx^i = Pi_i/f ; dPi_i = q F_ij dx^j - d_i V + Gamma^k_ij Pi_k dx^j,
// with V = q^2/2h + U.
EomRhs eom_rhs(const PhaseState& state, const MetricSpec& spec);

// Scalar observable over phase space; finite differences stand in for any
// missing analytic gradient.
struct Observable {
  std::string name;
  std::string scale_group;  // observables sharing a group share a drift scale
  std::function<double(const PhaseState&)> eval;
  std::function<Vec3(const PhaseState&)> grad_x;   // optional: d/dx
  std::function<Vec3(const PhaseState&)> grad_Pi;  // optional: d/dPi
};

// {A,B} = d_k A dB/dPi_k - dA/dPi_k d_k B + q F_kl dA/dPi_k dB/dPi_l.
double poisson_bracket(const Observable& a, const Observable& b, const PhaseState& state,
                       const MetricSpec& spec);

// Effective potential in either the direct form (V from the metric's U and
// charge term) or the closed radial/two-center fW forms. The displayed
// FormPot constants are kept in the pot37 convention: fW = closed form + E.
struct EffectivePotential {
  enum class Kind { metric, radial_coulomb, two_center, custom };
  Kind kind = Kind::metric;
  double q = 0.0, g = 0.0, beta = 0.0, gamma = 0.0, E = 0.0;
  std::function<double(const Vec3&)> fw_fn;  // custom fW

  static EffectivePotential from_metric(double q, double E);
  // fW = q^2 g^2/2r^2 + beta/r + gamma + E  (Runge-Lenz admissible radial form)
  static EffectivePotential radial_coulomb(double q, double g, double beta, double gamma,
                                           double E);
  // fW = q^2/2 S^2 + beta S + gamma + E with S = f - f0 (two-center form)
  static EffectivePotential two_center(double q, double beta, double gamma, double E);
  static EffectivePotential custom(std::function<double(const Vec3&)> fw);

  // G = fW at x. The metric supplies f (and S for the two-center form).
  double fw(const MetricSpec& spec, const Vec3& x) const;
  Vec3 grad_fw(const MetricSpec& spec, const Vec3& x) const;
  // Direct FormPot1 evaluation f*(U + q^2/2h + E/f - E) from the metric sample.
  double fw_direct(const MetricSpec& spec, const Vec3& x) const;
};

}  // namespace kkflow
