#include "dispatchsim/dispatch.hpp"

#include <cmath>
#include <stdexcept>

namespace dispatchsim {

namespace {

std::string where(int bus_index) {
  return bus_index >= 0 ? "bus " + std::to_string(bus_index + 1) + ": " : "";
}

void reject(int bus_index, const std::string& what) {
  throw std::invalid_argument(where(bus_index) + what);
}

}  // namespace

void GeneratorParams::validate(int bus_index) const {
  const double fields[] = {alpha, beta, gamma, loss_factor, p_min, p_max, demand};
  for (double f : fields)
    if (!std::isfinite(f)) reject(bus_index, "parameters must be finite");
  if (alpha > 0.0) reject(bus_index, "alpha must be <= 0");
  if (beta <= 0.0) reject(bus_index, "beta must be > 0");
  if (gamma > 0.0) reject(bus_index, "gamma must be <= 0");
  if (loss_factor < 0.0) reject(bus_index, "loss_b must be >= 0");
  if (p_min < 0.0) reject(bus_index, "p_min must be >= 0");
  if (p_max < p_min) reject(bus_index, "p_max must be >= p_min");
  if (demand < 0.0) reject(bus_index, "demand must be >= 0");
}

void SystemParams::validate() const {
  if (generators.empty())
    throw std::invalid_argument("the system needs at least one bus");
  if (!std::isfinite(price_lambda0))
    throw std::invalid_argument("lambda0 must be finite");
  for (int i = 0; i < size(); ++i) generators[i].validate(i);
}

std::optional<std::string> SystemParams::isolated_feasibility_warning() const {
  double lo = 0.0, hi = 0.0, total_demand = 0.0;
  for (const auto& g : generators) {
    lo += g.p_min - g.loss_factor * g.p_min * g.p_min;
    hi += g.p_max - g.loss_factor * g.p_max * g.p_max;
    total_demand += g.demand;
  }
  if (!(lo < total_demand))
    return "islanded operation infeasible: total demand " +
           std::to_string(total_demand) +
           " MW is not above the minimum net supply " + std::to_string(lo) +
           " MW";
  if (!(total_demand < hi))
    return "islanded operation infeasible: total demand " +
           std::to_string(total_demand) +
           " MW is not below the maximum net supply " + std::to_string(hi) +
           " MW";
  return std::nullopt;
}

double cost(const GeneratorParams& gp, double p) {
  const double d = p - gp.alpha;
  return d * d / (2.0 * gp.beta) + gp.gamma;
}

double line_loss(const GeneratorParams& gp, double p) {
  return gp.loss_factor * p * p;
}

double project_power(const GeneratorParams& gp, double lambda) {
  const double num = gp.beta * lambda + gp.alpha;
  const double den = 1.0 + 2.0 * gp.loss_factor * gp.beta * lambda;
  double u;
  if (den == 0.0) {
    // the stationary point ran off to +/- infinity with the sign of num;
    // num == 0 is the doubly-degenerate case and dispatches the minimum
    u = num > 0.0 ? gp.p_max : gp.p_min;
  } else {
    u = num / den;
  }
  return std::min(std::max(u, gp.p_min), gp.p_max);
}

bool projection_degenerate(const GeneratorParams& gp, double lambda) {
  return 1.0 + 2.0 * gp.loss_factor * gp.beta * lambda == 0.0;
}

double bus_mismatch(const GeneratorParams& gp, double p) {
  return gp.demand + line_loss(gp, p) - p;
}

}  // namespace dispatchsim
