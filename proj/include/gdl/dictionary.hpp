#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "gdl/unmixing.hpp"

namespace gdl {

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int S = 3;
  int N = 6;
  double lambda = 1e-3;
  double mu = 1e-3;
  double alpha = 0.5;  // only used when the graphs carry features
  int batch_size = 16;
  int epochs = 10;
  double lr_C = 0.1;
  std::optional<double> lr_A;  // 0.1 if alpha < 0.5, else 1.0
  double lr_h = 0.001;
  Optimizer optimizer = Optimizer::Adam;
  bool learn_h = false;
  bool nonneg = false;
  std::uint64_t seed = 0;
  // Factor applied to sum_k v_s u~ in the weight-atom gradient; defaults to 1/(2B).
  std::optional<double> weight_grad_scale;
  UnmixOptions unmix;

  double feature_lr() const { return lr_A.value_or(alpha < 0.5 ? 0.1 : 1.0); }
};

/// Per-step losses with a running mean over the last `window` entries.
class LossTrace {
 public:
  explicit LossTrace(std::size_t window = 10);

  // Appends a loss and returns the updated running mean.
  double push(double loss);
  void mark_event();

  std::size_t window() const noexcept { return window_; }
  std::size_t size() const noexcept { return loss_.size(); }
  const std::vector<double>& loss() const noexcept { return loss_; }
  const std::vector<double>& running_mean() const noexcept { return mean_; }
  const std::vector<int>& events() const noexcept { return event_; }

 private:
  std::size_t window_;
  std::vector<double> loss_;
  std::vector<double> mean_;
  std::vector<int> event_;
};

/// Fires when the running mean rises above rho times its trailing minimum.
/// Nothing fires before `window` steps; after a firing the trailing minimum
/// restarts from the current running mean.
class ChangeDetector {
 public:
  ChangeDetector(std::size_t window, double rho = 1.5);

  // Returns true when this step is a change event.
  bool push(double running_mean);

 private:
  std::size_t window_;
  double rho_;
  std::size_t steps_ = 0;
  double trailing_min_ = 0.0;
  bool above_ = false;
};

struct AtomGradients {
  std::vector<Matrix> structure;
  std::vector<Matrix> features;  // empty without feature atoms
};

/// Per-parameter optimizer state, created lazily on the first step.
class OptimizerState {
 public:
  explicit OptimizerState(Optimizer kind = Optimizer::Adam) : kind_(kind) {}

  // Applies one update to every parameter of the group `slot`.
  void update(std::size_t slot, std::vector<Matrix>& params, const std::vector<Matrix>& grads, double lr);
  void next_step() { ++t_; }
  Optimizer kind() const noexcept { return kind_; }

 private:
  struct Moments {
    std::vector<Matrix> m, v;
  };
  Optimizer kind_;
  long t_ = 0;
  std::vector<Moments> slots_;
};

Dictionary init_dictionary(const std::vector<GraphRepr>& dataset, const TrainConfig& cfg, std::mt19937_64& rng);

AtomGradients atoms_gradient(const std::vector<GraphRepr>& batch, const std::vector<UnmixResult>& fits,
                             const Dictionary& d);

std::vector<Vector> weight_atoms_gradient(const std::vector<UnmixResult>& fits, const Dictionary& d,
                                          std::optional<double> scale = std::nullopt);

Matrix project_symmetric(const Matrix& m);
Vector project_simplex(const Vector& x);
Matrix project_nonneg(const Matrix& m);

/// Unmixes every graph of the batch (in parallel) against the dictionary.
std::vector<UnmixResult> unmix_batch(const std::vector<GraphRepr>& batch, const Dictionary& d,
                                     const UnmixOptions& opts);

struct StepResult {
  Dictionary dictionary;
  double loss = 0.0;  // batch mean of the regularized unmixing loss
  double value = 0.0;  // batch mean of the (F)GW term alone
};

StepResult gdl_step(const Dictionary& d, const std::vector<GraphRepr>& batch, const TrainConfig& cfg,
                    OptimizerState& state);

struct FitResult {
  Dictionary dictionary;
  LossTrace trace;
};

FitResult fit(const std::vector<GraphRepr>& dataset, const TrainConfig& cfg);

// Returns the next batch, or an empty vector once the stream is exhausted.
using GraphSource = std::function<std::vector<GraphRepr>()>;

struct StreamOptions {
  std::size_t window = 5;
  double rho = 1.5;
  std::size_t snapshot_every = 0;  // 0 keeps only the final dictionary
};

struct StreamResult {
  std::vector<Dictionary> snapshots;
  LossTrace trace;  // per-batch mean (F)GW loss
  std::vector<std::size_t> events;  // step indices
};

/// Single pass over the stream with constant-step SGD. The dictionary is
/// initialized from the first batch.
StreamResult fit_stream(const GraphSource& source, const TrainConfig& cfg, const StreamOptions& sopts = {});

}  // namespace gdl
