#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sylrate/audio_io.hpp"
#include "sylrate/params.hpp"

namespace sylrate {

struct SearchSpace {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimensions() const { return lower.size(); }
    // Throws ValidationError unless lower_d < upper_d for every dimension
    // (lower_d == upper_d is allowed to pin a dimension).
    void validate() const;
};

struct PsoConfig {
    int n_particles = 50;
    int max_iterations = 200;
    double phi_p = 1.4962;
    double phi_g = 1.4962;
    double omega = 0.7298;
    std::uint64_t seed = 0;
    int stagnation_window = 25; // 0 disables the early stop
    double stagnation_tol = 1e-8;

    void validate() const;
};

struct SwarmResult {
    std::vector<double> best_position;
    double best_cost = 0.0;
    std::vector<double> cost_trace; // global best after each iteration, non-increasing
    int iterations_run = 0;         // the initial evaluation sweep counts as iteration 1
    long evaluations = 0;           // n_particles * iterations_run
};

using CostFn = std::function<double(const std::vector<double>&)>;

// Standard inertia-weight PSO, minimizing. Per particle and dimension:
//   v <- omega*v + phi_p*r_p*(pbest - x) + phi_g*r_g*(gbest - x); x <- x + v
// with fresh uniform [0,1) r_p, r_g per dimension per iteration. Positions
// are clamped to the bounds and the clamped dimension's velocity zeroed.
// Initial positions are uniform in the bounds, initial velocities uniform in
// +-0.1*(upper-lower). pbest/gbest update on strict improvement, ties kept by
// the earlier particle. Stops at max_iterations or when the global best
// improves by less than stagnation_tol over stagnation_window consecutive
// iterations. Fully deterministic given config.seed. Throws ValidationError
// if cost_fn returns a non-finite value (the message names the position).
SwarmResult optimize(const CostFn& cost_fn, const SearchSpace& space, const PsoConfig& config);

enum class CostKind { inv_f, mae };

// 8-D search space for the detection task: weights in [-2, 5], threshold in
// [0.01, 10].
SearchSpace default_search_space();

// Cost of an 8-D position (w_1..w_7, theta) over a corpus: full detection
// pipeline plus the chosen cost. Band-energy matrices, speech masks, and
// ground truth are computed once up front and shared by every evaluation.
CostFn make_pipeline_cost(const Corpus& corpus, CostKind cost_kind,
                          const PipelineConfig& pipeline_config, int n_threads = 1);

struct TrainResult {
    PipelineParams params;
    SwarmResult swarm;
};

// Joint 8-D optimization of (w_1..w_7, theta) against the chosen cost over
// the training corpus. Band-energy matrices, speech masks, and ground truth
// are computed once per utterance and cached across all cost evaluations;
// only the weighted sum onward depends on the position. Utterance costs may
// be evaluated on n_threads workers; results are reduced in utterance order,
// so the outcome is independent of thread count.
TrainResult train_pipeline(const Corpus& corpus, CostKind cost_kind,
                           const PipelineConfig& pipeline_config, const PsoConfig& pso_config,
                           const SearchSpace& space = default_search_space(), int n_threads = 1);

} // namespace sylrate
