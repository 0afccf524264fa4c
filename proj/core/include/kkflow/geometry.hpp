#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kkflow/vec3.hpp"

namespace kkflow {

// Evaluation at a point outside the configured domain (f <= 0, h <= 0, or
// within r_min of a singular center / surface).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested the Dirac-string gauge potential on the string itself.
class GaugeStringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MetricKind {
  taub_nut,
  lee_lee,
  winding_string,
  extended_taub_nut,
  multicenter,
  flat_kepler,
  custom,
};

struct Center {
  double mass = 0.0;
  Vec3 pos{};
};

// External scalar potential attached to a metric. The theorem3 forms bake the
// radial U(r) = (q^2 g^2/2r^2 + beta/r + gamma)/f - q^2/2h + E closed form
// (and its two-center analogue) so the integrator sees one potential path.
struct ExternalPotential {
  enum class Kind { zero, constant, coulomb, theorem3, theorem3_two_center, custom };
  Kind kind = Kind::zero;
  double u0 = 0.0;                              // constant
  double k = 0.0;                               // coulomb: U = -k/r
  double q = 0.0, beta = 0.0, gamma = 0.0, E = 0.0;  // theorem3 forms (g from the metric)
  std::function<double(const Vec3&)> fn;        // custom (finite-difference gradient)

  static ExternalPotential zero() { return {}; }
  static ExternalPotential constant(double u);
  static ExternalPotential coulomb(double k);
  static ExternalPotential custom(std::function<double(const Vec3&)> f);
};

// One metric from the conformally flat family g_ij = f(x) delta_ij with
// vertical factor h, monopole charge g, and external potential U.
struct MetricSpec {
  MetricKind kind = MetricKind::flat_kepler;

  double m = 0.0;                    // taub-nut / lee-lee NUT parameter
  double a0 = 0.0;                   // lee-lee Higgs parameter
  double ea = 0.0, eb = 1.0, ec = 0.0, ed = 0.0;  // extended taub-nut a,b,c,d
  double f0 = 1.0;                   // multicenter constant term
  std::vector<Center> centers;       // multicenter NUT charges/positions
  double g = 0.0;                    // monopole charge (B = g x/r^3 for radial kinds)
  ExternalPotential U{};
  double r_min = 1e-9;               // exclusion radius around singular loci

  std::function<double(const Vec3&)> custom_f, custom_h, custom_U;  // custom kind

  static MetricSpec taub_nut(double m);
  static MetricSpec lee_lee(double m, double a0);
  static MetricSpec winding_string(double u0 = 0.0);
  static MetricSpec extended_taub_nut(double a, double b, double c, double d);
  static MetricSpec multicenter(double f0, std::vector<Center> centers);
  static MetricSpec two_center(double m1, double m2, const Vec3& a, double f0 = 1.0);
  static MetricSpec flat_kepler(double coulomb_k = 0.0);
  static MetricSpec custom(std::function<double(const Vec3&)> f,
                           std::function<double(const Vec3&)> h,
                           std::function<double(const Vec3&)> U = nullptr);

  bool radial() const {
    return kind == MetricKind::taub_nut || kind == MetricKind::lee_lee ||
           kind == MetricKind::winding_string || kind == MetricKind::extended_taub_nut ||
           kind == MetricKind::flat_kepler;
  }
  // Distance to the nearest singular locus (centers, origin, or the r = 1
  // surface for winding strings); +inf when the metric is globally regular.
  double domain_distance(const Vec3& x) const;
};

struct MetricSample {
  double f = 1.0;
  Vec3 grad_f{};
  double laplacian_f = 0.0;
  double h = 1.0;
  Vec3 grad_h{};
  double U = 0.0;
  Vec3 grad_U{};
};

// gamma[k][i][j] = Gamma^k_ij, symmetric in (i,j).
struct ChristoffelSample {
  Ten3 gamma{};
};

struct FieldSample {
  Vec3 B{};
  Mat3 F{};  // F_ij = eps_ijk B_k
};

MetricSample metric_eval(const MetricSpec& spec, const Vec3& x);
ChristoffelSample christoffel(const MetricSample& sample);
FieldSample magnetic_field(const MetricSpec& spec, const Vec3& x);

// Dirac-string gauge A_phi = -g cos(theta) (string along the z axis through
// each center), superposed per center for multicenter metrics. Used only by
// the 4D lift; the reduced dynamics consumes F.
Vec3 gauge_potential(const MetricSpec& spec, const Vec3& x);

}  // namespace kkflow
