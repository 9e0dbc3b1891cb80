#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "ogrl/error.hpp"

namespace ogrl {

// Mass-sum tolerance for b + d + u = 1.
inline constexpr double kMassTolerance = 1e-9;
// Fusion is refused once conflict reaches 1 - kConflictTolerance.
inline constexpr double kConflictTolerance = 1e-12;

// Binomial subjective-logic opinion (belief, disbelief, uncertainty, base rate).
// Always valid: instances come from the checked factories below.
class Opinion {
 public:
  // Validates ranges and the mass sum. Sums within kMassTolerance of 1 are
  // rescaled onto the simplex; larger deviations are rejected.
  static Opinion make(double b, double d, double u, double a) {
    if (!std::isfinite(b) || !std::isfinite(d) || !std::isfinite(u) ||
        !std::isfinite(a)) {
      throw InvalidOpinion("non-finite component");
    }
    b = snap(b, "b");
    d = snap(d, "d");
    u = snap(u, "u");
    a = snap(a, "a");
    const double sum = b + d + u;
    if (std::abs(sum - 1.0) > kMassTolerance) {
      throw InvalidOpinion("b + d + u = " + std::to_string(sum) + ", expected 1");
    }
    if (sum != 1.0) {
      b /= sum;
      d /= sum;
      u /= sum;
    }
    return Opinion(b, d, u, a);
  }

  // Fully uncertain opinion with base rate a.
  static Opinion vacuous(double a) { return make(0.0, 0.0, 1.0, a); }

  // Dogmatic embedding of a probability: (p, 1 - p, 0, p).
  static Opinion from_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw OutOfRange("probability " + std::to_string(p) + " outside [0, 1]");
    }
    return Opinion(p, 1.0 - p, 0.0, p);
  }

  double belief() const noexcept { return b_; }
  double disbelief() const noexcept { return d_; }
  double uncertainty() const noexcept { return u_; }
  double base_rate() const noexcept { return a_; }

  // P = b + a u.
  double projected_probability() const noexcept { return b_ + a_ * u_; }

  friend bool operator==(const Opinion&, const Opinion&) = default;

 private:
  Opinion(double b, double d, double u, double a) : b_(b), d_(d), u_(u), a_(a) {}

  static double snap(double x, const char* name) {
    if (x < -kMassTolerance || x > 1.0 + kMassTolerance) {
      throw InvalidOpinion(std::string(name) + " = " + std::to_string(x) +
                           " outside [0, 1]");
    }
    return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
  }

  double b_;
  double d_;
  double u_;
  double a_;
};

inline Opinion make_opinion(double b, double d, double u, double a) {
  return Opinion::make(b, d, u, a);
}

inline double projected_probability(const Opinion& w) noexcept {
  return w.projected_probability();
}

inline Opinion opinion_from_probability(double p) {
  return Opinion::from_probability(p);
}

inline double fusion_conflict(const Opinion& x, const Opinion& y) noexcept {
  return x.belief() * y.disbelief() + y.belief() * x.disbelief();
}

// Belief Constraint Fusion of two binomial opinions.
//
//   harmony  = b1 u2 + b2 u1 + b1 b2
//   conflict = b1 d2 + b2 d1
//   b = harmony / (1 - conflict),  u = u1 u2 / (1 - conflict),  d = 1 - b - u
//   a = (a1 (1 - u1) + a2 (1 - u2)) / (2 - u1 - u2)
//
// The base rate is 0/0 when both operands are vacuous; the symmetric limit
// (a1 + a2) / 2 is used there.
inline Opinion bcf_fuse(const Opinion& x, const Opinion& y) {
  const double b1 = x.belief(), u1 = x.uncertainty(), a1 = x.base_rate();
  const double b2 = y.belief(), u2 = y.uncertainty(), a2 = y.base_rate();

  const double conflict = fusion_conflict(x, y);
  if (conflict >= 1.0 - kConflictTolerance) {
    throw TotalConflict("conflict " + std::to_string(conflict) +
                        " leaves nothing to fuse");
  }
  const double harmony = b1 * u2 + b2 * u1 + b1 * b2;
  const double scale = 1.0 / (1.0 - conflict);
  const double b = harmony * scale;
  const double u = u1 * u2 * scale;
  const double d = 1.0 - b - u;

  const double committed = 2.0 - u1 - u2;
  const double a = committed > 0.0
                       ? (a1 * (1.0 - u1) + a2 * (1.0 - u2)) / committed
                       : 0.5 * (a1 + a2);
  return Opinion::make(b, d, u, a);
}

// "(b, d, u, a)" with the requested number of decimals.
inline std::string format_opinion(const Opinion& w, int decimals = 3) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "(%.*f, %.*f, %.*f, %.*f)", decimals,
                w.belief(), decimals, w.disbelief(), decimals, w.uncertainty(),
                decimals, w.base_rate());
  return buf;
}

}  // namespace ogrl
