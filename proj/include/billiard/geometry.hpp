// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace billiard {

enum class ProfileKind {
  TruncatedQuarterStadium,
  PowerProfile,
  ConstantRectangle,
  Custom,
};

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view name);

/// Width function L(x) of a partially rectangular billiard on [-B0, B1].
///
/// The billiard is {(x, y) : -B0 <= x <= B1, 0 <= y <= L(x)}; the rectangle
/// R is x <= 0 and the wing W is x >= 0. L equals L0 on the rectangle and is
/// non-increasing on the wing, with L0 - L(x) ~ c_L x^gamma near 0. Wings are
/// truncated by a vertical wall at x = B1 with L(B1) > 0.
///
/// Profiles are immutable once built.
class BilliardProfile {
 public:
  using Function = std::function<double(double)>;

  /// Hand-built profile. Used for diagnostics of non-standard widths; its
  /// slope supremum is found by sampling.
  static BilliardProfile custom(std::string label, double L0, double B0,
                                double B1, double gamma, double c_L,
                                Function width, Function slope);

  ProfileKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  double L0() const { return L0_; }
  double B0() const { return B0_; }
  double B1() const { return B1_; }
  double gamma() const { return gamma_; }
  double c_L() const { return c_L_; }
  /// Only meaningful for the truncated quarter stadium; 0 otherwise.
  double truncation_fraction() const { return truncation_fraction_; }

  /// L(x). Returns exactly L0 for x <= 0.
  double width(double x) const;
  /// L'(x). Returns exactly 0 for x <= 0.
  double slope(double x) const;

  /// sup over (0, b] of |L'|, for 0 < b <= B1.
  double slope_sup(double b) const;
  /// sup over (0, b] of |L'|^2, evaluated separately from slope_sup.
  double slope_sq_sup(double b) const;
  /// True when |L'| is non-decreasing on (0, B1) by construction.
  bool has_monotone_slope() const;

  bool in_rectangle(double x) const { return x <= 0.0; }
  bool in_wing(double x) const { return x >= 0.0; }

  /// Flat key-value record (kind, L0, B0, B1, gamma, c_L,
  /// truncation_fraction) used by config files and the eigenpair cache.
  std::map<std::string, std::string> to_record() const;
  static BilliardProfile from_record(const std::map<std::string, std::string>& record);

 private:
  friend BilliardProfile make_truncated_quarter_stadium(double, double, double);
  friend BilliardProfile make_power_profile(double, double, double, double, double);
  friend BilliardProfile make_constant_rectangle(double, double, double);

  BilliardProfile() = default;

  ProfileKind kind_ = ProfileKind::ConstantRectangle;
  std::string label_;
  double L0_ = 1.0;
  double B0_ = 1.0;
  double B1_ = 1.0;
  double gamma_ = 0.0;
  double c_L_ = 0.0;
  double truncation_fraction_ = 0.0;
  Function custom_width_;
  Function custom_slope_;
};

/// Quarter stadium with circular wing L(x) = sqrt(L0^2 - x^2), truncated at
/// B1 = truncation_fraction * L0. gamma = 2 and c_L = 1 / (2 L0).
BilliardProfile make_truncated_quarter_stadium(double L0, double truncation_fraction,
                                               double B0);
inline BilliardProfile make_truncated_quarter_stadium(double L0, double truncation_fraction) {
  return make_truncated_quarter_stadium(L0, truncation_fraction, L0);
}

/// L(x) = L0 - c_L x^gamma on the wing.
BilliardProfile make_power_profile(double L0, double B0, double B1, double gamma, double c_L);

/// Plain rectangle [-B0, B1] x [0, L0]. Solver test fixture only: it carries
/// gamma = 0 and c_L = 0 and is not an admissible theorem geometry.
BilliardProfile make_constant_rectangle(double L0, double B0, double B1);

/// delta(b) = sup|L'| + sup|L'|^2 over (0, b]; requires 0 < b < B1.
double delta_b(const BilliardProfile& profile, double b);

struct ProfileCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double measured = 0.0;
  std::string detail;
};

struct ProfileReport {
  std::vector<ProfileCheck> checks;
  double width_exponent_slope = 0.0;   // log-log slope of L0 - L(x)
  double slope_exponent_slope = 0.0;   // log-log slope of -L'(x)
  double sup_of_squared_slope = 0.0;   // sup |L'|^2 on (0, B1/4]
  double square_of_sup_slope = 0.0;    // (sup |L'|)^2 on (0, B1/4]

  bool all_passed() const;
  std::string to_json() const;
};

/// Checks every profile invariant and reports measured asymptotic slopes.
/// Never throws on an inadmissible profile; failures are carried in the report.
ProfileReport validate(const BilliardProfile& profile);

}  // namespace billiard
