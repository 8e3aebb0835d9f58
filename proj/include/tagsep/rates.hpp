#pragma once

namespace tagsep {

/// Jump rates of the model and the Bernoulli density of the initial environment.
///
/// Environment particles jump symmetrically by one site at rate p1 and by two
/// sites at rate p2 in each direction; the tagged particle jumps one site to
/// the right at rate q1. Validated once on construction through make_rates().
struct Rates {
  double p1 = 0.0;
  double p2 = 1.0;
  double q1 = 1.0;
  double rho = 0.5;

  bool operator==(const Rates&) const = default;
};

/// Throws DomainError unless p1 >= 0, p2 > 0, q1 > 0 and 0 <= rho <= 1.
void validate(const Rates& r);

/// Validating constructor.
Rates make_rates(double p1, double p2, double q1, double rho);

/// Asymptotic speed of the tagged particle, p2*q1 / (p2 + rho*q1).
double speed(const Rates& r);

/// Mean upward speed of the regeneration boundary, p1 + 3*p2.
double drift(const Rates& r);

/// True when the speed strictly exceeds the boundary drift (regenerative CLT regime).
bool clt_regime(const Rates& r);

struct DerivedConstants {
  double m = 0.0;
  double w = 0.0;
  bool clt_regime = false;
};

DerivedConstants derive(const Rates& r);

// Jump rate of an environment particle across distance |d| (0 outside {1,2}).
inline double jump_rate(const Rates& r, int distance) {
  if (distance == 1 || distance == -1) return r.p1;
  if (distance == 2 || distance == -2) return r.p2;
  return 0.0;
}

}  // namespace tagsep
