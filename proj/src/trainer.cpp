#include "fnov/trainer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fnov {

FnoModel init_random(const FnoSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int h = spec.hidden_width;
  const double pointwise_scale = 1.0 / std::sqrt(static_cast<double>(h));
  const double spectral_scale = 1.0 / h;
  auto sample = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * gauss(rng);
    return m;
  };

  FnoModel model;
  model.spec = spec;
  auto& p = model.params;
  p.lifting_weight = sample(h, 1, pointwise_scale);
  p.lifting_bias = Eigen::VectorXd::Zero(h);
  for (int l = 0; l < spec.depth; ++l) {
    SpectralLayer layer;
    for (int k = 0; k < spec.modes_kept; ++k) {
      Eigen::MatrixXcd w(h, h);
      w.real() = sample(h, h, spectral_scale * std::sqrt(0.5));
      w.imag() = sample(h, h, spectral_scale * std::sqrt(0.5));
      layer.mode_weights.push_back(std::move(w));
    }
    layer.bypass = sample(h, h, pointwise_scale);
    layer.bias = Eigen::VectorXd::Zero(h);
    p.layers.push_back(std::move(layer));
  }
  p.projection_weight = Eigen::RowVectorXd::Zero(h);
  p.projection_bias = 0.0;
  return model;
}

FnoModel fit_projection(const FnoModel& model, std::span<const Sample> data, FitDiagnostics* diag) {
  if (data.empty()) throw std::invalid_argument("fit_projection: empty dataset");
  const Eigen::Index n = model.spec.grid_size;
  const Eigen::Index h = model.spec.hidden_width;

  Eigen::MatrixXd design(n * static_cast<Eigen::Index>(data.size()), h + 1);
  Eigen::VectorXd rhs(design.rows());
  for (std::size_t s = 0; s < data.size(); ++s) {
    const Eigen::Index row = static_cast<Eigen::Index>(s) * n;
    design.block(row, 0, n, h) = forward_trace(model, data[s].input).back();
    design.block(row, h, n, 1).setOnes();
    model.spec.grid().check(data[s].target, "fit_projection");
    rhs.segment(row, n) = data[s].target;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  Eigen::VectorXd coef = cod.solve(rhs);

  FnoModel fitted = model;
  fitted.params.projection_weight = coef.head(h).transpose();
  fitted.params.projection_bias = coef[h];

  if (diag != nullptr) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto& sv = svd.singularValues();
    diag->rank = cod.rank();
    diag->unknowns = h + 1;
    diag->condition = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff() : INFINITY;
    diag->train_mse = (design * coef - rhs).squaredNorm() / static_cast<double>(rhs.size());
  }
  return fitted;
}

double evaluate_mse(const std::function<Field(const Field&)>& predict, std::span<const Sample> holdout) {
  if (holdout.empty()) throw std::invalid_argument("evaluate_mse: empty holdout set");
  double sum = 0.0;
  Eigen::Index count = 0;
  for (const auto& s : holdout) {
    Field pred = predict(s.input);
    if (pred.size() != s.target.size()) throw std::invalid_argument("evaluate_mse: prediction length mismatch");
    sum += (pred - s.target).squaredNorm();
    count += s.target.size();
  }
  return sum / static_cast<double>(count);
}

double evaluate_mse(const FnoModel& model, std::span<const Sample> holdout) {
  return evaluate_mse([&](const Field& u) { return forward(model, u); }, holdout);
}

TrainedModel train_model(const FnoSpec& spec, const Dataset& train, const Dataset& holdout) {
  TrainedModel out;
  out.model = fit_projection(init_random(spec), train.samples, &out.fit);
  out.model.reference_input = train.mean_input();
  out.test_mse = evaluate_mse(out.model, holdout.samples);
  return out;
}

}  // namespace fnov
