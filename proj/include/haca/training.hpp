// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "haca/checkpoint.hpp"
#include "haca/model.hpp"
#include "haca/run_config.hpp"

namespace haca::inline HACA_PRECISION_NS {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// -sum_t log p_t[target_t] over explicit probability rows.
double cross_entropy_loss(std::span<const std::vector<double>> distributions, std::span<const int> targets);

// Elementwise clamp into [lo, hi].
void clip_gradients(std::span<real> grads, real lo, real hi);

// True: feed the ground-truth previous word. Draws from `rng` only when
// 0 < teacher_forcing_prob < 1.
bool scheduled_sample(double teacher_forcing_prob, std::mt19937_64& rng);

// Adadelta with per-parameter accumulators E[g^2] and E[dx^2].
class Adadelta {
 public:
  Adadelta(const ParameterStore& params, double rho, double epsilon);

  // Applies x += lr * dx using the parameters' current gradients. Throws
  // TrainingError naming the parameter on a non-finite gradient, before any
  // parameter changes.
  void step(ParameterStore& params, double lr);

  const std::vector<std::vector<real>>& squared_gradients() const { return sq_grad_; }
  const std::vector<std::vector<real>>& squared_updates() const { return sq_update_; }

  std::vector<NamedArray> export_state(const ParameterStore& params) const;
  void import_state(const ParameterStore& params, std::span<const NamedArray> arrays);

 private:
  double rho_;
  double epsilon_;
  std::vector<std::vector<real>> sq_grad_;
  std::vector<std::vector<real>> sq_update_;
};

// Multiplies the rate by `factor` once the tracked score has not beaten its
// best for `patience` consecutive epochs, then restarts the count.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, std::size_t patience, double factor);
  bool observe(double score);  // true when the rate was reduced
  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t bad_epochs() const { return bad_epochs_; }
  bool has_best() const { return has_best_; }
  void restore(double lr, double best, bool has_best, std::size_t bad_epochs);

 private:
  double lr_;
  std::size_t patience_;
  double factor_;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t bad_epochs_ = 0;
};

// Rate after replaying `history` through a fresh scheduler.
double lr_plateau(std::span<const double> history, double lr, std::size_t patience = 4, double factor = 0.5);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // token-mean over the epoch
  double val_loss = 0.0;
  double val_bleu4 = 0.0;
  double lr = 0.0;  // rate used during the epoch
  double teacher_forcing_prob = 1.0;

  static std::string csv_header();
  std::string csv_row() const;
};

// Parameters and configuration only.
Checkpoint model_checkpoint(const Model& model);
Model model_from_checkpoint(const Checkpoint& checkpoint);
// Exact name and shape match required.
void load_parameters(ParameterStore& params, std::span<const NamedArray> arrays);

// Owns one run: the model, optimizer, scheduler and the run's single random
// generator. The generator first initializes the parameters, then drives
// shuffling, dropout and scheduled sampling in that order within each batch.
class Trainer {
 public:
  Trainer(const HacaConfig& model_config, const TrainConfig& config);
  Trainer(const Checkpoint& checkpoint, const TrainConfig& config);

  // One epoch over `train`, then validation on `val` (may be empty).
  EpochMetrics run_epoch(std::span<const Sample> train, std::span<const Sample> val);

  // Epochs until max_epochs or until `on_epoch` returns false.
  std::vector<EpochMetrics> train(std::span<const Sample> train, std::span<const Sample> val,
                                  const std::function<bool(const EpochMetrics&)>& on_epoch = {});

  // Updates on one batch; returns its token-mean loss.
  double train_batch(std::span<const Sample* const> batch, double teacher_forcing_prob);

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const TrainConfig& config() const { return config_; }
  std::size_t epoch() const { return epoch_; }
  double lr() const { return scheduler_.lr(); }
  const std::vector<std::size_t>& last_order() const { return last_order_; }

  Checkpoint checkpoint() const;

 private:
  TrainConfig config_;
  std::mt19937_64 rng_;
  Model model_;
  Adadelta optimizer_;
  PlateauScheduler scheduler_;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> last_order_;
};

}  // namespace haca
