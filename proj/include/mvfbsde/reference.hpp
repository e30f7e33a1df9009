#pragma once

// Straightforward single-threaded versions of the OpenMP kernels. They share
// no code with the parallel paths and exist so that tests and the benchmark
// can compare against them.

#include "mvfbsde/basis.hpp"
#include "mvfbsde/estimator.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/sampling.hpp"

namespace mvfbsde::reference {

PathMatrix gen_increments(const SampleConfig& cfg, const TimeGrid& grid);

WeightVector fit_weights(std::span<const double> xs, std::span<const double> targets,
                         const BasisSpec& basis);

PathMatrix rollout_states(const DecoupledPolicy& policy, const PathMatrix& dW,
                          const LQParams& p, const TimeGrid& grid);

DecoupledPolicy backward_pass(const PathMatrix& X, const PathMatrix& dW, const LQParams& p,
                              const TimeGrid& grid, const BasisSpec& basis);

EstimatorReport evaluate_estimator(const Ensemble& e, const GeneratorEval& gen,
                                   const TimeGrid& grid);

}  // namespace mvfbsde::reference
