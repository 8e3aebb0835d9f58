#include "tagsep/rates.hpp"

#include <cmath>
#include <sstream>

#include "tagsep/errors.hpp"

namespace tagsep {

void validate(const Rates& r) {
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "invalid rates (p1=" << r.p1 << ", p2=" << r.p2 << ", q1=" << r.q1
       << ", rho=" << r.rho << "): " << what;
    throw DomainError(os.str());
  };
  if (!std::isfinite(r.p1) || !std::isfinite(r.p2) || !std::isfinite(r.q1) ||
      !std::isfinite(r.rho))
    fail("non-finite value");
  if (r.p1 < 0.0) fail("p1 must be >= 0");
  if (!(r.p2 > 0.0)) fail("p2 must be > 0");
  if (!(r.q1 > 0.0)) fail("q1 must be > 0");
  if (r.rho < 0.0 || r.rho > 1.0) fail("rho must lie in [0, 1]");
}

Rates make_rates(double p1, double p2, double q1, double rho) {
  Rates r{p1, p2, q1, rho};
  validate(r);
  return r;
}

double speed(const Rates& r) {
  validate(r);
  return r.p2 * r.q1 / (r.p2 + r.rho * r.q1);
}

double drift(const Rates& r) {
  validate(r);
  return r.p1 + 3.0 * r.p2;
}

bool clt_regime(const Rates& r) { return speed(r) > drift(r); }

DerivedConstants derive(const Rates& r) {
  DerivedConstants d;
  d.m = speed(r);
  d.w = drift(r);
  d.clt_regime = d.m > d.w;
  return d;
}

}  // namespace tagsep
