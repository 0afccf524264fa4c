#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kkflow/dynamics.hpp"
#include "kkflow/killing.hpp"

namespace kkflow {

struct TwoCenterSpec {
  double m1 = 1.0, m2 = 1.0;
  Vec3 a{0, 0, 1};  // half-separation; centers at +a (m1) and -a (m2)
  double f0 = 1.0;

  MetricSpec metric() const { return MetricSpec::two_center(m1, m2, a, f0); }
  Vec3 axis() const { return normalized(a); }
};

// The confinement 2-sphere of Theorem 4; median_plane flags m1 = m2.
struct SphereSpec {
  double rho = 0.0;
  Vec3 center{};
  double radius = 0.0;
  bool median_plane = false;
  Vec3 axis{0, 0, 1};
};

// J = x cross Pi - q g x/r.
Vec3 angular_momentum(const PhaseState& state, double g);

// K = Pi cross J + beta x/r.
Vec3 runge_lenz_radial(const PhaseState& state, double g, double beta);

// The admissible external potential U(r) = (q^2 g^2/2r^2 + beta/r + gamma)/f
// - q^2/2h + E, as an attachable descriptor (g comes from the metric).
ExternalPotential theorem3_potential(double q, double beta, double gamma, double E);

SphereSpec two_center_sphere(const TwoCenterSpec& tc);

struct TwoCenterObservables {
  double Ja = 0.0;
  double Q = 0.0;
  double Ka = 0.0;
  bool Ka_valid = false;  // q = 0 disables K_a
};
TwoCenterObservables two_center_observables(const PhaseState& state, const TwoCenterSpec& tc,
                                            double beta);

// fW = q^2/2 S^2 + beta S + gamma with S = m1/|x-a| + m2/|x+a|.
double two_center_effective_potential(const TwoCenterSpec& tc, double q, double beta,
                                      double gamma, const Vec3& x);

// ---- coefficient-set factories (stored in the paper's normalization) ----

// C_i = g_im eps^m_kl n^k x^l, C = -q g n.x/r, rank-1 truncation.
KillingCoefficients angular_momentum_coefficients(const MetricSpec& spec, const Vec3& n,
                                                  double q);
// C_ij = 2 g_ij n.x - g_ik n_j x^k - g_jk n_i x^k, C_i = (qg/r) g_im eps n x,
// C = beta n.x/r, rank-2 truncation.
KillingCoefficients runge_lenz_coefficients(const MetricSpec& spec, const Vec3& n, double q,
                                            double beta);
// C_ij = g_ij (the metric itself as a Killing tensor).
KillingCoefficients metric_killing_tensor(const MetricSpec& spec);
// Two-center Runge-Lenz set: n = a/|a|, C_i per RL2MC, C per RL3MC.
KillingCoefficients two_center_rl_coefficients(const TwoCenterSpec& tc, double q, double beta);
// Two-center axial rotation set: C_i = g_im eps^m_lk (a^l/a) x^k,
// C = -q T.a/a, rank-1 truncation (generates J_a).
KillingCoefficients two_center_ja_coefficients(const TwoCenterSpec& tc, double q);

// ---- lifted Killing-Stackel tensors ----

struct LiftedTensor {
  int dim = 4;
  // components(x)[mu][nu], contravariant, symmetric; indices 0..dim-1 with the
  // vertical slot last for dim 4 and slots (4,5) last for dim 5.
  std::function<std::array<std::array<double, 5>, 5>(const Vec3&)> components;

  double quadratic_form(const Vec3& x, std::span<const double> p) const;
};

using GaugeField = std::function<Vec3(const Vec3&)>;

// 4D lift: C^{i4} = C^i/q - C^i_k A^k, C^{44} = 2C/q^2 - 2 C_k A^k/q + C_jk A^j A^k,
// all contractions on the flat arrays (stored fields divided by f).
LiftedTensor lift_killing_stackel(const KillingCoefficients& coeffs, const MetricSpec& spec,
                                  double q, GaugeField A = nullptr);

// 5D Bargmann tensor: C^{ij} = 2 eta delta^{ij} - n^i x^j - n^j x^i,
// C^{44} = 2 eta V(r), eta = n.x.
LiftedTensor bargmann_kepler_tensor(const Vec3& n, std::function<double(double)> V);

// K.n = (p cross L + m^2 V(r) x).n for the Bargmann lift.
double bargmann_rl_scalar(const Vec3& n, const Vec3& x, const Vec3& p, double mass,
                          const std::function<double(double)>& V);

// ---- named observable registry (CSV columns) ----

struct ObservableContext {
  MetricSpec spec;
  double g = 0.0;     // monopole charge for J/K
  double beta = 0.0;  // Runge-Lenz beta
  bool two_center = false;
  TwoCenterSpec tc{};
  Vec3 bargmann_n{1, 0, 0};
  double kepler_k = 1.0;  // V = -k/r for the Bargmann scalar
};

// Recognized names: H, q, Jx, Jy, Jz, Kx, Ky, Kz, Ja, Q2, Ka, KBn.
Observable make_observable(const std::string& name, const ObservableContext& ctx);
std::vector<Observable> make_observables(const std::vector<std::string>& names,
                                         const ObservableContext& ctx);

}  // namespace kkflow
