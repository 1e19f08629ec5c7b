#include "fnov/pde.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fnov {

namespace {

using Complex = std::complex<double>;

double draw(std::mt19937_64& rng, const Interval& range) {
  if (range.hi == range.lo) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

/// Random Fourier series with modes 1..max_mode, amplitude ~ 1/(1+k),
/// normalized to zero mean and unit peak-to-peak range.
Field smooth_shape(int n, int max_mode, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Field f = Field::Zero(n);
  for (int k = 1; k <= max_mode; ++k) {
    const double amp = gauss(rng) / (1.0 + k);
    const double ph = phase(rng);
    for (int i = 0; i < n; ++i) {
      f[i] += amp * std::cos(2.0 * std::numbers::pi * k * i / n + ph);
    }
  }
  const double span = f.maxCoeff() - f.minCoeff();
  if (span > 0.0) f = (f.array() - f.minCoeff()) / span;
  return f;
}

}  // namespace

void AdrParams::validate() const {
  if (!(diffusion >= 0.0)) throw std::invalid_argument("AdrParams: diffusion must be >= 0");
  if (!(reaction >= 0.0)) throw std::invalid_argument("AdrParams: reaction must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("AdrParams: horizon must be > 0");
  if (!std::isfinite(velocity)) throw std::invalid_argument("AdrParams: velocity must be finite");
}

void AdrRanges::validate() const {
  for (const Interval* r : {&diffusion, &velocity, &reaction}) {
    if (!(r->lo <= r->hi)) throw std::invalid_argument("AdrRanges: empty parameter range");
  }
  if (diffusion.lo < 0.0 || reaction.lo < 0.0) {
    throw std::invalid_argument("AdrRanges: diffusion and reaction must be nonnegative");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("AdrRanges: horizon must be > 0");
}

Field Dataset::mean_input() const {
  if (samples.empty()) throw std::invalid_argument("Dataset::mean_input: empty dataset");
  Field acc = Field::Zero(grid.n_points);
  for (const auto& s : samples) acc += s.input;
  return acc / static_cast<double>(samples.size());
}

Field adr_propagate(const Grid& grid, const Field& u0, const AdrParams& p) {
  grid.check(u0, "adr_propagate");
  p.validate();
  const int n = grid.n_points;

  std::vector<Complex> spatial(u0.data(), u0.data() + n);
  std::vector<Complex> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, spatial);

  for (int k = 0; k < n; ++k) {
    const int signed_k = k <= n / 2 ? k : k - n;
    const double xi = 2.0 * std::numbers::pi * signed_k / grid.domain_length;
    const Complex rate(-p.diffusion * xi * xi - p.reaction, -p.velocity * xi);
    spectrum[static_cast<std::size_t>(k)] *= std::exp(rate * p.horizon);
  }

  fft.inv(spatial, spectrum);
  Field out(n);
  for (int i = 0; i < n; ++i) out[i] = spatial[static_cast<std::size_t>(i)].real();
  return out;
}

Field random_initial_condition(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = grid.n_points;
  Field shape = smooth_shape(n, std::max(1, n / 4), rng);
  return (0.2 + 1.8 * shape.array()).matrix();
}

Dataset gen_dataset(int n_samples, const Grid& grid, const AdrRanges& ranges, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("gen_dataset: n_samples must be >= 1");
  ranges.validate();

  Dataset ds;
  ds.grid = grid;
  ds.ranges = ranges;
  ds.seed = seed;
  ds.samples.reserve(static_cast<std::size_t>(n_samples));

  std::mt19937_64 rng(seed);
  const int n = grid.n_points;
  for (int s = 0; s < n_samples; ++s) {
    Sample sample;
    sample.input = (0.2 + 1.8 * smooth_shape(n, std::max(1, n / 4), rng).array()).matrix();
    sample.params.diffusion = draw(rng, ranges.diffusion);
    sample.params.velocity = draw(rng, ranges.velocity);
    sample.params.reaction = draw(rng, ranges.reaction);
    sample.params.horizon = ranges.horizon;
    sample.target = adr_propagate(grid, sample.input, sample.params);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Field sample_admissible(const ConstraintSet& c, const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = grid.n_points;
  const double lo = c.lower_d();
  const double hi = c.upper_d();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Amplitude is capped so the shape alone roughly respects the slope bound;
  // the projection handles whatever is left.
  const double level = lo + (hi - lo) * unit(rng);
  const double amplitude = (hi - lo) * unit(rng);
  Field shape = smooth_shape(n, std::max(1, n / 4), rng);
  Field u = (level + amplitude * (shape.array() - 0.5)).matrix();
  return project_feasible(u, c);
}

}  // namespace fnov
