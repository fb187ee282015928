#pragma once

#include <map>
#include <string>
#include <variant>

#include "etlalm/types.hpp"

namespace etlalm {

/// E0 / k^p, p > 1.
struct Polynomial {
  double e0 = 0.0;
  double p = 2.0;
  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

/// E0 ρ^k, 0 < ρ < 1.
struct Exponential {
  double e0 = 0.0;
  double rho = 0.5;
  friend bool operator==(const Exponential&, const Exponential&) = default;
};

/// Threshold 0: broadcast whenever the iterate moved.
struct Zero {
  friend bool operator==(const Zero&, const Zero&) = default;
};

/// Periodic comparison scheme: broadcast at rounds k with k % N == 0, no event test.
struct EveryN {
  std::size_t period = 1;
  friend bool operator==(const EveryN&, const EveryN&) = default;
};

using TriggerRule = std::variant<Polynomial, Exponential, Zero, EveryN>;

/// Validates the rule's parameter ranges; throws ConfigError.
TriggerRule validated(TriggerRule rule);

class TriggerSchedule {
 public:
  TriggerSchedule() : rule_(Zero{}) {}
  explicit TriggerSchedule(TriggerRule rule) : rule_(validated(rule)) {}

  const TriggerRule& rule() const { return rule_; }
  const TriggerRule& rule_for(std::size_t agent) const;
  void set_override(std::size_t agent, TriggerRule rule);
  const std::map<std::size_t, TriggerRule>& overrides() const { return overrides_; }

  /// True when any agent uses the EveryN rule.
  bool periodic(std::size_t agent) const;
  bool any_periodic() const;

  friend bool operator==(const TriggerSchedule&, const TriggerSchedule&) = default;

 private:
  TriggerRule rule_;
  std::map<std::size_t, TriggerRule> overrides_;
};

/// E_{i,k} for k >= 1. EveryN has no threshold and yields NaN; k = 0 throws
/// (round 0 is an unconditional broadcast).
double threshold(const TriggerSchedule& s, std::size_t agent, std::size_t round);

/// max_i E_{i,k} over n agents. For k = 0 the base constant E0 of each rule is used.
double max_threshold(const TriggerSchedule& s, std::size_t agents, std::size_t round);

/// EveryN broadcast decision for round k.
bool periodic_broadcast(const EveryN& rule, std::size_t round);

/// ||x_new - x̃_prev|| > E, strictly.
bool should_broadcast(std::span<const double> x_new, std::span<const double> x_tilde_prev,
                      double e);

/// "poly:E0:p", "exp:E0:rho", "zero", "everyN:N", case-insensitive.
TriggerSchedule parse_schedule(const std::string& spec);
std::string to_string(const TriggerSchedule& s);

/// ρ such that E0·ρ^k equals base^(exponent·k), e.g. 0.9^(0.1k) -> ρ = 0.9^0.1.
double reparameterize_rate(double base, double exponent);

}  // namespace etlalm
