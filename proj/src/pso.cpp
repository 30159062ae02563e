#include "sylrate/pso.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "sylrate/errors.hpp"

namespace sylrate {

namespace {

// Explicit [0,1) mapping so streams do not depend on the standard library's
// distribution implementation.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string describe_position(const std::vector<double>& x) {
    std::ostringstream ss;
    ss << "(";
    for (std::size_t d = 0; d < x.size(); ++d) ss << (d ? ", " : "") << x[d];
    ss << ")";
    return ss.str();
}

double checked_cost(const CostFn& cost_fn, const std::vector<double>& x) {
    const double c = cost_fn(x);
    if (!std::isfinite(c))
        throw ValidationError("optimize: cost function returned a non-finite value at " +
                              describe_position(x));
    return c;
}

} // namespace

void SearchSpace::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw ValidationError("SearchSpace: lower/upper must be non-empty and equal length");
    for (std::size_t d = 0; d < lower.size(); ++d)
        if (lower[d] > upper[d])
            throw ValidationError("SearchSpace: lower bound exceeds upper bound in dimension " +
                                  std::to_string(d));
}

void PsoConfig::validate() const {
    if (n_particles < 2) throw ValidationError("PsoConfig: n_particles must be >= 2");
    if (max_iterations < 1) throw ValidationError("PsoConfig: max_iterations must be >= 1");
    if (!(phi_p > 0.0) || !(phi_g > 0.0) || !(omega > 0.0))
        throw ValidationError("PsoConfig: coefficients must be positive");
    if (stagnation_window < 0)
        throw ValidationError("PsoConfig: stagnation_window must be >= 0");
}

SwarmResult optimize(const CostFn& cost_fn, const SearchSpace& space, const PsoConfig& config) {
    space.validate();
    config.validate();
    const std::size_t dims = space.dimensions();
    const std::size_t particles = static_cast<std::size_t>(config.n_particles);

    std::mt19937_64 rng(config.seed);

    std::vector<std::vector<double>> x(particles, std::vector<double>(dims));
    std::vector<std::vector<double>> v(particles, std::vector<double>(dims));
    for (std::size_t i = 0; i < particles; ++i)
        for (std::size_t d = 0; d < dims; ++d) {
            const double range = space.upper[d] - space.lower[d];
            x[i][d] = space.lower[d] + uniform01(rng) * range;
            v[i][d] = (2.0 * uniform01(rng) - 1.0) * 0.1 * range;
        }

    // initial evaluation sweep counts as iteration 1
    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pbest_cost(particles);
    for (std::size_t i = 0; i < particles; ++i) pbest_cost[i] = checked_cost(cost_fn, x[i]);

    std::size_t g = 0;
    for (std::size_t i = 1; i < particles; ++i)
        if (pbest_cost[i] < pbest_cost[g]) g = i;
    std::vector<double> gbest = pbest[g];
    double gbest_cost = pbest_cost[g];

    SwarmResult result;
    result.cost_trace.push_back(gbest_cost);
    result.iterations_run = 1;

    while (result.iterations_run < config.max_iterations) {
        for (std::size_t i = 0; i < particles; ++i) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double rp = uniform01(rng);
                const double rg = uniform01(rng);
                v[i][d] = config.omega * v[i][d] + config.phi_p * rp * (pbest[i][d] - x[i][d]) +
                          config.phi_g * rg * (gbest[d] - x[i][d]);
                x[i][d] += v[i][d];
                if (x[i][d] < space.lower[d]) {
                    x[i][d] = space.lower[d];
                    v[i][d] = 0.0;
                } else if (x[i][d] > space.upper[d]) {
                    x[i][d] = space.upper[d];
                    v[i][d] = 0.0;
                }
            }
            const double c = checked_cost(cost_fn, x[i]);
            if (c < pbest_cost[i]) {
                pbest_cost[i] = c;
                pbest[i] = x[i];
            }
        }
        for (std::size_t i = 0; i < particles; ++i)
            if (pbest_cost[i] < gbest_cost) {
                gbest_cost = pbest_cost[i];
                gbest = pbest[i];
            }
        ++result.iterations_run;
        result.cost_trace.push_back(gbest_cost);

        if (config.stagnation_window > 0 &&
            result.cost_trace.size() > static_cast<std::size_t>(config.stagnation_window)) {
            const double before =
                result.cost_trace[result.cost_trace.size() - 1 -
                                  static_cast<std::size_t>(config.stagnation_window)];
            if (before - gbest_cost < config.stagnation_tol) break;
        }
    }

    result.best_position = gbest;
    result.best_cost = gbest_cost;
    result.evaluations = static_cast<long>(particles) * result.iterations_run;
    return result;
}

} // namespace sylrate
