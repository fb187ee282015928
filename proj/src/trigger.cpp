#include "etlalm/trigger.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "etlalm/objective.hpp"

namespace etlalm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TriggerRule validated(TriggerRule rule) {
  std::visit(overloaded{
                 [](const Polynomial& r) {
                   if (!(r.p > 1.0)) throw ConfigError("poly schedule needs p > 1");
                   if (!(r.e0 >= 0.0)) throw ConfigError("poly schedule needs E0 >= 0");
                 },
                 [](const Exponential& r) {
                   if (!(r.rho > 0.0 && r.rho < 1.0))
                     throw ConfigError("exp schedule needs 0 < rho < 1");
                   if (!(r.e0 >= 0.0)) throw ConfigError("exp schedule needs E0 >= 0");
                 },
                 [](const Zero&) {},
                 [](const EveryN& r) {
                   if (r.period == 0) throw ConfigError("everyN schedule needs N >= 1");
                 },
             },
             rule);
  return rule;
}

const TriggerRule& TriggerSchedule::rule_for(std::size_t agent) const {
  auto it = overrides_.find(agent);
  return it == overrides_.end() ? rule_ : it->second;
}

void TriggerSchedule::set_override(std::size_t agent, TriggerRule rule) {
  overrides_[agent] = validated(rule);
}

bool TriggerSchedule::periodic(std::size_t agent) const {
  return std::holds_alternative<EveryN>(rule_for(agent));
}

bool TriggerSchedule::any_periodic() const {
  if (std::holds_alternative<EveryN>(rule_)) return true;
  return std::any_of(overrides_.begin(), overrides_.end(),
                     [](const auto& kv) { return std::holds_alternative<EveryN>(kv.second); });
}

double threshold(const TriggerSchedule& s, std::size_t agent, std::size_t round) {
  if (round == 0) throw ProtocolError("threshold queried at round 0");
  const double k = static_cast<double>(round);
  return std::visit(overloaded{
                        [&](const Polynomial& r) { return r.e0 / std::pow(k, r.p); },
                        [&](const Exponential& r) { return r.e0 * std::pow(r.rho, k); },
                        [](const Zero&) { return 0.0; },
                        [](const EveryN&) { return std::numeric_limits<double>::quiet_NaN(); },
                    },
                    s.rule_for(agent));
}

double max_threshold(const TriggerSchedule& s, std::size_t agents, std::size_t round) {
  double e = 0.0;
  for (std::size_t i = 0; i < agents; ++i) {
    double v = 0.0;
    if (round == 0) {
      v = std::visit(overloaded{
                         [](const Polynomial& r) { return r.e0; },
                         [](const Exponential& r) { return r.e0; },
                         [](const Zero&) { return 0.0; },
                         [](const EveryN&) { return std::numeric_limits<double>::quiet_NaN(); },
                     },
                     s.rule_for(i));
    } else {
      v = threshold(s, i, round);
    }
    if (std::isnan(v)) return v;
    e = std::max(e, v);
  }
  return e;
}

bool periodic_broadcast(const EveryN& rule, std::size_t round) { return round % rule.period == 0; }

bool should_broadcast(std::span<const double> x_new, std::span<const double> x_tilde_prev,
                      double e) {
  if (e < 0.0) throw std::invalid_argument("should_broadcast: negative threshold");
  return vec::distance(x_new, x_tilde_prev) > e;
}

namespace {

double parse_number(const std::string& field, std::size_t pos, const std::string& spec) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (field.empty() || *end != '\0')
    throw ConfigError("schedule '" + spec + "': bad number '" + field + "' at position " +
                      std::to_string(pos));
  return v;
}

}  // namespace

TriggerSchedule parse_schedule(const std::string& spec) {
  std::string lower = spec;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<std::string> fields;
  std::vector<std::size_t> starts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = lower.find(':', start);
    fields.push_back(lower.substr(start, colon - start));
    starts.push_back(start);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  const std::string& kind = fields[0];
  auto arity = [&](std::size_t want) {
    if (fields.size() != want)
      throw ConfigError("schedule '" + spec + "': '" + kind + "' takes " +
                        std::to_string(want - 1) + " parameter(s), error at position " +
                        std::to_string(fields.size() > want ? starts[want] : spec.size()));
  };
  if (kind == "poly") {
    arity(3);
    return TriggerSchedule(Polynomial{parse_number(fields[1], starts[1], spec),
                                      parse_number(fields[2], starts[2], spec)});
  }
  if (kind == "exp") {
    arity(3);
    // rho may be given as "base^exponent", e.g. 0.9^0.1 for E_k = 0.9^(0.1k)
    const std::string& rate = fields[2];
    const std::size_t caret = rate.find('^');
    const double rho =
        caret == std::string::npos
            ? parse_number(rate, starts[2], spec)
            : reparameterize_rate(parse_number(rate.substr(0, caret), starts[2], spec),
                                  parse_number(rate.substr(caret + 1), starts[2] + caret + 1, spec));
    return TriggerSchedule(Exponential{parse_number(fields[1], starts[1], spec), rho});
  }
  if (kind == "zero") {
    arity(1);
    return TriggerSchedule(Zero{});
  }
  if (kind == "everyn") {
    arity(2);
    const double n = parse_number(fields[1], starts[1], spec);
    if (!(n >= 1.0) || n != std::floor(n))
      throw ConfigError("schedule '" + spec + "': N must be a positive integer at position " +
                        std::to_string(starts[1]));
    return TriggerSchedule(EveryN{static_cast<std::size_t>(n)});
  }
  throw ConfigError("schedule '" + spec + "': unknown kind '" + fields[0] + "' at position 0");
}

std::string to_string(const TriggerSchedule& s) {
  return std::visit(overloaded{
                        [](const Polynomial& r) {
                          return "poly:" + format_number(r.e0) + ":" + format_number(r.p);
                        },
                        [](const Exponential& r) {
                          return "exp:" + format_number(r.e0) + ":" + format_number(r.rho);
                        },
                        [](const Zero&) { return std::string("zero"); },
                        [](const EveryN& r) { return "everyN:" + std::to_string(r.period); },
                    },
                    s.rule());
}

double reparameterize_rate(double base, double exponent) { return std::pow(base, exponent); }

}  // namespace etlalm
