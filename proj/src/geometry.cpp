// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"

namespace billiard {

namespace {

constexpr int kSlopeSamples = 2048;

std::string num(double v) { return fmt15(v); }

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::TruncatedQuarterStadium: return "truncated-quarter-stadium";
    case ProfileKind::PowerProfile: return "power-profile";
    case ProfileKind::ConstantRectangle: return "constant-rectangle";
    case ProfileKind::Custom: return "custom";
  }
  return "custom";
}

ProfileKind profile_kind_from_string(std::string_view name) {
  if (name == "truncated-quarter-stadium") return ProfileKind::TruncatedQuarterStadium;
  if (name == "power-profile") return ProfileKind::PowerProfile;
  if (name == "constant-rectangle") return ProfileKind::ConstantRectangle;
  fail(ErrorKind::Parameter, "unknown profile kind '" + std::string(name) +
                                 "' (expected truncated-quarter-stadium, power-profile or "
                                 "constant-rectangle)");
}

BilliardProfile BilliardProfile::custom(std::string label, double L0, double B0, double B1,
                                        double gamma, double c_L, Function width,
                                        Function slope) {
  require(L0 > 0 && B0 > 0 && B1 > 0, ErrorKind::Parameter,
          "custom profile needs positive L0, B0, B1");
  require(bool(width) && bool(slope), ErrorKind::Parameter,
          "custom profile needs width and slope functions");
  BilliardProfile p;
  p.kind_ = ProfileKind::Custom;
  p.label_ = std::move(label);
  p.L0_ = L0;
  p.B0_ = B0;
  p.B1_ = B1;
  p.gamma_ = gamma;
  p.c_L_ = c_L;
  p.custom_width_ = std::move(width);
  p.custom_slope_ = std::move(slope);
  return p;
}

BilliardProfile make_truncated_quarter_stadium(double L0, double truncation_fraction, double B0) {
  require(L0 > 0, ErrorKind::Parameter, "quarter stadium: L0 must be positive");
  require(B0 > 0, ErrorKind::Parameter, "quarter stadium: B0 must be positive");
  require(truncation_fraction > 0.5 && truncation_fraction <= 0.99, ErrorKind::Parameter,
          "quarter stadium: truncation_fraction must lie in (0.5, 0.99], got " +
              num(truncation_fraction));
  BilliardProfile p;
  p.kind_ = ProfileKind::TruncatedQuarterStadium;
  p.label_ = "truncated-quarter-stadium";
  p.L0_ = L0;
  p.B0_ = B0;
  p.B1_ = truncation_fraction * L0;
  p.gamma_ = 2.0;
  p.c_L_ = 1.0 / (2.0 * L0);
  p.truncation_fraction_ = truncation_fraction;
  return p;
}

BilliardProfile make_power_profile(double L0, double B0, double B1, double gamma, double c_L) {
  require(L0 > 0 && B0 > 0 && B1 > 0, ErrorKind::Parameter,
          "power profile: L0, B0, B1 must be positive");
  require(gamma >= 1.5, ErrorKind::Parameter,
          "power profile: the wing condition requires gamma >= 3/2, got " + num(gamma));
  require(c_L > 0, ErrorKind::Parameter, "power profile: c_L must be positive");
  if (L0 - c_L * std::pow(B1, gamma) <= 0) {
    const double x_crit = std::pow(L0 / c_L, 1.0 / gamma);
    fail(ErrorKind::Parameter, "power profile: width reaches zero at x = " + num(x_crit) +
                                   " before B1 = " + num(B1));
  }
  BilliardProfile p;
  p.kind_ = ProfileKind::PowerProfile;
  p.label_ = "power-profile";
  p.L0_ = L0;
  p.B0_ = B0;
  p.B1_ = B1;
  p.gamma_ = gamma;
  p.c_L_ = c_L;
  return p;
}

BilliardProfile make_constant_rectangle(double L0, double B0, double B1) {
  require(L0 > 0 && B0 > 0 && B1 > 0, ErrorKind::Parameter,
          "constant rectangle: L0, B0, B1 must be positive");
  BilliardProfile p;
  p.kind_ = ProfileKind::ConstantRectangle;
  p.label_ = "constant-rectangle";
  p.L0_ = L0;
  p.B0_ = B0;
  p.B1_ = B1;
  return p;
}

double BilliardProfile::width(double x) const {
  if (x <= 0.0) return L0_;
  switch (kind_) {
    case ProfileKind::TruncatedQuarterStadium:
      return std::sqrt((L0_ - x) * (L0_ + x));
    case ProfileKind::PowerProfile:
      return L0_ - c_L_ * std::pow(x, gamma_);
    case ProfileKind::ConstantRectangle:
      return L0_;
    case ProfileKind::Custom:
      return custom_width_(x);
  }
  return L0_;
}

double BilliardProfile::slope(double x) const {
  if (x <= 0.0) return 0.0;
  switch (kind_) {
    case ProfileKind::TruncatedQuarterStadium:
      return -x / std::sqrt((L0_ - x) * (L0_ + x));
    case ProfileKind::PowerProfile:
      return -c_L_ * gamma_ * std::pow(x, gamma_ - 1.0);
    case ProfileKind::ConstantRectangle:
      return 0.0;
    case ProfileKind::Custom:
      return custom_slope_(x);
  }
  return 0.0;
}

bool BilliardProfile::has_monotone_slope() const { return kind_ != ProfileKind::Custom; }

double BilliardProfile::slope_sup(double b) const {
  if (has_monotone_slope()) return std::abs(slope(b));
  double best = 0.0;
  for (int i = 1; i <= kSlopeSamples; ++i) {
    best = std::max(best, std::abs(slope(b * double(i) / kSlopeSamples)));
  }
  return best;
}

double BilliardProfile::slope_sq_sup(double b) const {
  if (has_monotone_slope()) {
    const double s = slope(b);
    return s * s;
  }
  double best = 0.0;
  for (int i = 1; i <= kSlopeSamples; ++i) {
    const double s = slope(b * double(i) / kSlopeSamples);
    best = std::max(best, s * s);
  }
  return best;
}

std::map<std::string, std::string> BilliardProfile::to_record() const {
  require(kind_ != ProfileKind::Custom, ErrorKind::Parameter,
          "custom profiles have no serialized form");
  return {
      {"kind", std::string(to_string(kind_))},
      {"L0", num(L0_)},
      {"B0", num(B0_)},
      {"B1", num(B1_)},
      {"gamma", num(gamma_)},
      {"c_L", num(c_L_)},
      {"truncation_fraction", num(truncation_fraction_)},
  };
}

BilliardProfile BilliardProfile::from_record(const std::map<std::string, std::string>& record) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = record.find(key);
    if (it == record.end()) fail(ErrorKind::Format, "profile record lacks key '" + key + "'");
    return it->second;
  };
  auto value = [&](const std::string& key) { return parse_double(get(key), key); };
  switch (profile_kind_from_string(get("kind"))) {
    case ProfileKind::TruncatedQuarterStadium:
      return make_truncated_quarter_stadium(value("L0"), value("truncation_fraction"),
                                            value("B0"));
    case ProfileKind::PowerProfile:
      return make_power_profile(value("L0"), value("B0"), value("B1"), value("gamma"),
                                value("c_L"));
    case ProfileKind::ConstantRectangle:
      return make_constant_rectangle(value("L0"), value("B0"), value("B1"));
    case ProfileKind::Custom:
      break;
  }
  fail(ErrorKind::Format, "profile record has unsupported kind");
}

double delta_b(const BilliardProfile& profile, double b) {
  require(b > 0 && b < profile.B1(), ErrorKind::Parameter,
          "delta_b: b must lie in (0, B1) = (0, " + num(profile.B1()) + "), got " + num(b));
  return profile.slope_sup(b) + profile.slope_sq_sup(b);
}

bool ProfileReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ProfileCheck& c) { return !c.applicable || c.passed; });
}

std::string ProfileReport::to_json() const {
  nlohmann::ordered_json j;
  j["all_passed"] = all_passed();
  j["width_exponent_slope"] = round15(width_exponent_slope);
  j["slope_exponent_slope"] = round15(slope_exponent_slope);
  j["sup_of_squared_slope"] = round15(sup_of_squared_slope);
  j["square_of_sup_slope"] = round15(square_of_sup_slope);
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"applicable", c.applicable},
                   {"passed", c.passed},
                   {"measured", round15(c.measured)},
                   {"detail", c.detail}});
  }
  return j.dump(2);
}

ProfileReport validate(const BilliardProfile& profile) {
  ProfileReport report;
  const double L0 = profile.L0();
  const double B1 = profile.B1();
  const bool fixture = profile.kind() == ProfileKind::ConstantRectangle;

  {
    ProfileCheck c{"rectangle_width_constant", true, true, 0.0, {}};
    double worst = 0.0;
    for (int i = 0; i <= 256; ++i) {
      const double x = -profile.B0() * double(i) / 256.0;
      worst = std::max(worst, std::abs(profile.width(x) - L0));
    }
    c.measured = worst;
    c.passed = worst == 0.0;
    c.detail = "L(x) = L0 for x <= 0";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"wing_non_increasing", true, true, 0.0, {}};
    constexpr int n = 4096;
    double worst_rise = 0.0;
    double worst_slope = 0.0;
    double prev = profile.width(0.0);
    for (int i = 1; i <= n; ++i) {
      const double x = B1 * double(i) / n;
      const double w = profile.width(x);
      worst_rise = std::max(worst_rise, w - prev);
      worst_slope = std::max(worst_slope, profile.slope(x));
      prev = w;
    }
    c.measured = std::max(worst_rise, worst_slope);
    c.passed = worst_rise <= 1e-14 * L0 && worst_slope <= 0.0;
    c.detail = "L non-increasing on (0, B1); measured = largest rise or positive slope";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"wing_wall_positive", true, true, 0.0, {}};
    c.measured = profile.width(B1);
    c.passed = c.measured > 0.0;
    c.detail = "L(B1) > 0 (truncated wing)";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"gamma_admissible", true, true, 0.0, {}};
    c.measured = profile.gamma();
    c.applicable = !fixture;
    c.passed = profile.gamma() >= 1.5 && profile.c_L() > 0;
    c.detail = fixture ? "fixture kind, exempt" : "gamma >= 3/2 and c_L > 0";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"continuity_at_interface", true, true, 0.0, {}};
    c.measured = std::abs(profile.width(-1e-12) - profile.width(1e-12));
    c.passed = c.measured <= 1e-9 * L0 && profile.width(0.0) == L0;
    c.detail = "|L(-1e-12) - L(1e-12)| <= 1e-9 L0 and L(0) = L0";
    report.checks.push_back(c);
  }

  // Asymptotics near the interface, fitted on 64 log-spaced points in [1e-4, 1e-2].
  std::vector<double> xs, drops, slopes;
  for (int i = 0; i < 64; ++i) {
    const double x = std::pow(10.0, -4.0 + 2.0 * double(i) / 63.0);
    xs.push_back(x);
    drops.push_back(L0 - profile.width(x));
    slopes.push_back(-profile.slope(x));
  }
  const bool positive = std::all_of(drops.begin(), drops.end(), [](double d) { return d > 0; }) &&
                        std::all_of(slopes.begin(), slopes.end(), [](double d) { return d > 0; });
  {
    ProfileCheck c{"width_exponent", true, true, 0.0, {}};
    c.applicable = !fixture;
    if (positive) report.width_exponent_slope = loglog_slope(xs, drops);
    c.measured = report.width_exponent_slope;
    c.passed = positive && std::abs(c.measured - profile.gamma()) <= 0.02;
    c.detail = "log-log slope of L0 - L(x) within 0.02 of gamma";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"slope_exponent", true, true, 0.0, {}};
    c.applicable = !fixture;
    if (positive) report.slope_exponent_slope = loglog_slope(xs, slopes);
    c.measured = report.slope_exponent_slope;
    c.passed = positive && std::abs(c.measured - (profile.gamma() - 1.0)) <= 0.02;
    c.detail = "log-log slope of -L'(x) within 0.02 of gamma - 1";
    report.checks.push_back(c);
  }
  {
    ProfileCheck c{"leading_coefficient", true, true, 0.0, {}};
    c.applicable = !fixture;
    const double x = 1e-4;
    c.measured = profile.c_L() > 0
                     ? (L0 - profile.width(x)) / (profile.c_L() * std::pow(x, profile.gamma()))
                     : 0.0;
    c.passed = std::abs(c.measured - 1.0) <= 0.05;
    c.detail = "(L0 - L(x)) / (c_L x^gamma) at x = 1e-4 close to 1";
    report.checks.push_back(c);
  }

  const double b = 0.25 * B1;
  report.sup_of_squared_slope = profile.slope_sq_sup(b);
  const double s = profile.slope_sup(b);
  report.square_of_sup_slope = s * s;
  return report;
}

}  // namespace billiard
