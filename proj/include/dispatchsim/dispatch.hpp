#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dispatchsim {

// Per-bus economic data. Generation cost is quadratic in the produced power,
//   cost(p) = (p - alpha)^2 / (2 beta) + gamma,
// local line loss is loss_factor * p^2, and a bus with p_min = p_max = 0 is a
// pure load. All powers in MW, prices in currency/MW.
struct GeneratorParams {
  double alpha = 0.0;        // cost offset, <= 0
  double beta = 1.0;         // cost curvature divisor, > 0
  double gamma = 0.0;        // constant cost term, <= 0; reporting only
  double loss_factor = 0.0;  // quadratic loss coefficient, >= 0 (1/MW)
  double p_min = 0.0;        // lower generation limit, >= 0
  double p_max = 0.0;        // upper generation limit, >= p_min
  double demand = 0.0;       // local load, >= 0

  void validate(int bus_index = -1) const;  // throws std::invalid_argument
};

struct SystemParams {
  std::vector<GeneratorParams> generators;  // bus order defines indices
  double price_lambda0 = 0.0;               // distribution-system price

  int size() const { return static_cast<int>(generators.size()); }
  void validate() const;

  // Islanded operation needs room on both sides of the demand: summed lower
  // limits (plus their losses) strictly below total demand, summed upper
  // limits strictly above. Returns a message when that fails; grid-connected
  // operation is unaffected (the ER absorbs any imbalance).
  std::optional<std::string> isolated_feasibility_warning() const;
};

double cost(const GeneratorParams& gp, double p);
double line_loss(const GeneratorParams& gp, double p);

// Power a bus dispatches at price lambda: the stationary point
//   u = (beta*lambda + alpha) / (1 + 2*loss_factor*beta*lambda)
// clamped to [p_min, p_max]. At the singular denominator the limit direction
// decides: p_max when the numerator is positive, p_min when negative, and
// p_min in the doubly-degenerate zero/zero case (conservative convention --
// dispatch nothing extra; the engine flags the round when this fires).
double project_power(const GeneratorParams& gp, double lambda);

// True when project_power(gp, lambda) hit the singular-denominator branch.
bool projection_degenerate(const GeneratorParams& gp, double lambda);

// Local imbalance at generation level p: demand + loss - supply.
double bus_mismatch(const GeneratorParams& gp, double p);

}  // namespace dispatchsim
