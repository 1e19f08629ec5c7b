#pragma once

#include "fnov/fno.hpp"
#include "fnov/pde.hpp"

#include <functional>
#include <span>

namespace fnov {

/// Random hidden layers, zero biases, zero projection. Spectral weights are
/// complex Gaussian scaled by 1/H; lifting and bypass Gaussian scaled by
/// 1/sqrt(H). Deterministic in spec.seed.
FnoModel init_random(const FnoSpec& spec);

struct FitDiagnostics {
  Eigen::Index rank = 0;
  Eigen::Index unknowns = 0;
  double condition = 0.0;  // ratio of extreme singular values of the design
  double train_mse = 0.0;
};

/// Least-squares fit of the projection weights and bias on the frozen hidden
/// features of every sample. Rank-deficient designs get the minimum-norm
/// solution. Hidden parameters are copied through untouched.
FnoModel fit_projection(const FnoModel& model, std::span<const Sample> data, FitDiagnostics* diag = nullptr);

double evaluate_mse(const FnoModel& model, std::span<const Sample> holdout);
double evaluate_mse(const std::function<Field(const Field&)>& predict, std::span<const Sample> holdout);

struct TrainedModel {
  FnoModel model;
  FitDiagnostics fit;
  double test_mse = 0.0;
};

/// init_random, fit_projection on `train`, MSE on `holdout`; the training
/// input mean is stored as the model's frozen reference input.
TrainedModel train_model(const FnoSpec& spec, const Dataset& train, const Dataset& holdout);

}  // namespace fnov
