#pragma once

#include <functional>
#include <optional>

#include "kkflow/dynamics.hpp"
#include "kkflow/geometry.hpp"

namespace kkflow {

// Coefficient fields of a momentum-polynomial observable
//   Q = C + C^i Pi_i + 1/2 C^{ij} Pi_i Pi_j + 1/3! C^{ijl} Pi_i Pi_j Pi_l,
// stored in the paper's lower-index normalization (rank >= 1 fields carry one
// factor of f relative to the arrays that contract Pi). Analytic gradients are
// optional; central differences with step 1e-5*max(1,|x|) stand in otherwise.
struct KillingCoefficients {
  int order = 2;  // truncation order of the polynomial (0..3)

  std::function<double(const Vec3&)> C;    // scalar
  std::function<Vec3(const Vec3&)> Ci;     // C_i
  std::function<Mat3(const Vec3&)> Cij;    // C_ij, symmetric
  std::function<Ten3(const Vec3&)> Cijk;   // C_ijk, totally symmetric (optional)

  std::function<Vec3(const Vec3&)> grad_C;     // [k] = d_k C
  std::function<Mat3(const Vec3&)> grad_Ci;    // [k][i] = d_k C_i
  std::function<Ten3(const Vec3&)> grad_Cij;   // [k][i][j] = d_k C_ij

  // Direction parameter of the Runge-Lenz family C_ij = 2 g_ij n.x - g_ik n_j x^k - ...;
  // set by the factories, enables the closed-form symmetrized derivative.
  std::optional<Vec3> n;

  double eval_C(const Vec3& x) const { return C ? C(x) : 0.0; }
  Vec3 eval_Ci(const Vec3& x) const { return Ci ? Ci(x) : Vec3{}; }
  Mat3 eval_Cij(const Vec3& x) const { return Cij ? Cij(x) : zero_mat3(); }
  Ten3 eval_Cijk(const Vec3& x) const { return Cijk ? Cijk(x) : zero_ten3(); }
};

// Max-norm residuals of the four constraint lines at one point.
struct ConstraintResiduals {
  double order0 = 0.0;
  double order1 = 0.0;
  double order2 = 0.0;
  double order3 = 0.0;
  double worst() const;
};

// |(n x grad f).x| — vanishing makes g_im eps^m_kl n^k x^l a Killing vector.
double rank1_rotation_condition(const MetricSpec& spec, const Vec3& n, const Vec3& x);

// n x (x x grad f) — vanishing makes the Runge-Lenz rank-2 tensor Killing.
struct RlCondition {
  Vec3 v{};
  double norm = 0.0;
};
RlCondition rank2_rl_condition(const MetricSpec& spec, const Vec3& n, const Vec3& x);

// Symmetrized covariant derivative residual, max-norm.
// rank 1: max |1/2 (D_i C_j + D_j C_i)| with the textbook Levi-Civita D.
// rank 2 with the Runge-Lenz n-structure: the paper's scheme (g covariantly
//   constant, x the position vector field, n constant parameters), equal to
//   the closed form f^{-1}(g_(ij d_l) f n.x - g_(ij x_l) n.grad f); otherwise
//   the textbook cyclic sum D_i C_jl + D_j C_il + D_l C_ij.
double symmetrized_covariant_derivative(const KillingCoefficients& coeffs,
                                        const MetricSpec& spec, const Vec3& x, int rank);

// The four constraint lines with G = fW. Mixed tensors are raised with
// g^{ij} = delta^{ij}/f at orders 0-1 and with the flat metric at orders 2-3
// (the unique reading under which the paper's coefficient sets verify).
ConstraintResiduals van_holten_residuals(const KillingCoefficients& coeffs,
                                         const MetricSpec& spec,
                                         const EffectivePotential& pot, double q,
                                         const Vec3& x);

// Laplace obstruction Delta(fW - q^2 g^2/2r^2); analytic second derivatives
// for the closed radial form, 5-point stencil per axis otherwise. For the
// two-center form the subtraction is the per-center q^2 m_i^2/2d_i^2 analogue.
double laplace_obstruction(const EffectivePotential& pot, const MetricSpec& spec, double q,
                           double g, const Vec3& x);

}  // namespace kkflow
