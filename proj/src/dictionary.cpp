#include "gdl/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace gdl {

LossTrace::LossTrace(std::size_t window) : window_(window) {
  if (window_ == 0) fail(ErrorCode::BadArgument, "running-mean window must be >= 1");
}

double LossTrace::push(double loss) {
  loss_.push_back(loss);
  const std::size_t n = std::min(window_, loss_.size());
  double sum = 0.0;
  for (std::size_t i = loss_.size() - n; i < loss_.size(); ++i) sum += loss_[i];
  mean_.push_back(sum / static_cast<double>(n));
  event_.push_back(0);
  return mean_.back();
}

void LossTrace::mark_event() {
  if (!event_.empty()) event_.back() = 1;
}

ChangeDetector::ChangeDetector(std::size_t window, double rho) : window_(window), rho_(rho) {
  if (window_ == 0 || !(rho_ > 1.0)) fail(ErrorCode::BadArgument, "detector needs window >= 1 and rho > 1");
}

bool ChangeDetector::push(double running_mean) {
  ++steps_;
  if (steps_ < window_) return false;
  if (steps_ == window_) {
    trailing_min_ = running_mean;
    return false;
  }
  const bool above = running_mean > rho_ * trailing_min_;
  const bool fire = above && !above_;
  above_ = above;
  if (fire) {
    trailing_min_ = running_mean;
    above_ = false;
  } else {
    trailing_min_ = std::min(trailing_min_, running_mean);
  }
  return fire;
}

void OptimizerState::update(std::size_t slot, std::vector<Matrix>& params, const std::vector<Matrix>& grads,
                            double lr) {
  if (params.size() != grads.size()) fail(ErrorCode::ShapeMismatch, "gradient count differs from parameter count");
  if (kind_ == Optimizer::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (slots_.size() <= slot) slots_.resize(slot + 1);
  Moments& mo = slots_[slot];
  if (mo.m.empty()) {
    for (const Matrix& p : params) {
      mo.m.push_back(Matrix::Zero(p.rows(), p.cols()));
      mo.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  const long t = std::max(t_, 1L);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    mo.m[i] = b1 * mo.m[i] + (1.0 - b1) * grads[i];
    mo.v[i] = b2 * mo.v[i] + (1.0 - b2) * grads[i].cwiseAbs2();
    params[i].array() -= lr * (mo.m[i].array() / c1) / ((mo.v[i].array() / c2).sqrt() + eps);
  }
}

namespace {

Matrix principal_submatrix(const Matrix& C, const std::vector<Eigen::Index>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = C(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

Matrix row_subset(const Matrix& A, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), A.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = A.row(idx[i]);
  return out;
}

}  // namespace

Dictionary init_dictionary(const std::vector<GraphRepr>& dataset, const TrainConfig& cfg, std::mt19937_64& rng) {
  if (dataset.empty()) fail(ErrorCode::EmptyDataset, "cannot initialize a dictionary from an empty dataset");
  if (cfg.S < 1 || cfg.N < 1) fail(ErrorCode::BadArgument, "atom count and order must be >= 1");
  const Eigen::Index N = cfg.N;
  std::vector<std::size_t> exact, larger;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].order() == N) exact.push_back(i);
    if (dataset[i].order() >= N) larger.push_back(i);
  }
  if (larger.empty()) fail(ErrorCode::ValidationError, "no graph has order >= N");
  const bool features = dataset.front().has_features();
  const std::vector<std::size_t>& pool = exact.empty() ? larger : exact;

  Dictionary d;
  d.alpha = cfg.alpha;
  d.lambda = cfg.lambda;
  d.mu = cfg.mu;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int s = 0; s < cfg.S; ++s) {
    const GraphRepr& g = dataset[pool[pick(rng)]];
    if (features && !g.has_features()) fail(ErrorCode::MissingFeatures, "dataset mixes graphs with and without features");
    if (g.order() == N) {
      d.atoms.push_back(g.C);
      if (features) d.feature_atoms.push_back(*g.A);
      continue;
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(g.order()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(static_cast<std::size_t>(N));
    d.atoms.push_back(principal_submatrix(g.C, perm));
    if (features) d.feature_atoms.push_back(row_subset(*g.A, perm));
  }
  if (cfg.learn_h) d.weight_atoms.assign(static_cast<std::size_t>(cfg.S), Histogram::uniform(N));
  validate_dictionary(d);
  return d;
}

AtomGradients atoms_gradient(const std::vector<GraphRepr>& batch, const std::vector<UnmixResult>& fits,
                             const Dictionary& d) {
  if (batch.size() != fits.size() || batch.empty())
    fail(ErrorCode::ShapeMismatch, "need one unmixing result per batch graph");
  const Eigen::Index S = d.size(), N = d.order();
  const double B = static_cast<double>(batch.size());
  const bool features = d.has_features();
  const double alpha = features ? d.alpha : 1.0;
  AtomGradients out;
  out.structure.assign(static_cast<std::size_t>(S), Matrix::Zero(N, N));
  if (features) out.features.assign(static_cast<std::size_t>(S), Matrix::Zero(N, d.feature_dim()));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Matrix& T = fits[k].coupling;
    const Vector& w = fits[k].embedding.w;
    if (T.rows() != batch[k].order() || T.cols() != N || w.size() != S)
      fail(ErrorCode::ShapeMismatch, "unmixing result does not match the dictionary");
    const Vector ht = T.colwise().sum().transpose();
    const Matrix gC = combine(d.atoms, w).cwiseProduct(ht * ht.transpose()) - T.transpose() * batch[k].C * T;
    Matrix gA;
    if (features) {
      if (!batch[k].A) fail(ErrorCode::MissingFeatures, "batch graph lacks features");
      gA = ht.asDiagonal() * combine(d.feature_atoms, w) - T.transpose() * *batch[k].A;
    }
    for (Eigen::Index s = 0; s < S; ++s) {
      if (w[s] == 0.0) continue;
      out.structure[static_cast<std::size_t>(s)] += (2.0 * alpha * w[s] / B) * gC;
      if (features) out.features[static_cast<std::size_t>(s)] += (2.0 * (1.0 - alpha) * w[s] / B) * gA;
    }
  }
  return out;
}

std::vector<Vector> weight_atoms_gradient(const std::vector<UnmixResult>& fits, const Dictionary& d,
                                          std::optional<double> scale) {
  if (fits.empty()) fail(ErrorCode::ShapeMismatch, "empty batch");
  const Eigen::Index S = d.size(), N = d.order();
  const double factor = scale.value_or(1.0 / (2.0 * static_cast<double>(fits.size())));
  std::vector<Vector> out(static_cast<std::size_t>(S), Vector::Zero(N));
  for (const UnmixResult& r : fits) {
    if (!r.embedding.v || r.duals.beta.size() != N)
      fail(ErrorCode::MissingDuals, "weight-atom gradients need weight embeddings and atom-side duals");
    const Vector& v = *r.embedding.v;
    if (v.size() != S) fail(ErrorCode::LengthMismatch, "weight embedding length differs from atom count");
    for (Eigen::Index s = 0; s < S; ++s) out[static_cast<std::size_t>(s)] += (factor * v[s]) * r.duals.beta;
  }
  return out;
}

Matrix project_symmetric(const Matrix& m) { return (m + m.transpose()) / 2.0; }

Matrix project_nonneg(const Matrix& m) { return m.cwiseMax(0.0); }

Vector project_simplex(const Vector& x) {
  if (x.size() == 0 || !x.allFinite()) fail(ErrorCode::BadArgument, "simplex projection needs a finite non-empty vector");
  std::vector<double> u(x.data(), x.data() + x.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) tau = t;
  }
  return (x.array() - tau).cwiseMax(0.0);
}

std::vector<UnmixResult> unmix_batch(const std::vector<GraphRepr>& batch, const Dictionary& d,
                                     const UnmixOptions& opts) {
  std::vector<UnmixResult> fits(batch.size());
  std::exception_ptr error;
  const auto n = static_cast<long>(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      fits[static_cast<std::size_t>(k)] = unmix(batch[static_cast<std::size_t>(k)], d, opts);
    } catch (...) {
#pragma omp critical(gdl_unmix_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return fits;
}

StepResult gdl_step(const Dictionary& d, const std::vector<GraphRepr>& batch, const TrainConfig& cfg,
                    OptimizerState& state) {
  if (batch.empty()) fail(ErrorCode::EmptyDataset, "empty minibatch");
  for (const GraphRepr& g : batch) validate_graph(g);
  const std::vector<UnmixResult> fits = unmix_batch(batch, d, cfg.unmix);

  StepResult out{d, 0.0, 0.0};
  for (const UnmixResult& r : fits) {
    out.loss += r.loss;
    out.value += r.value;
  }
  out.loss /= static_cast<double>(fits.size());
  out.value /= static_cast<double>(fits.size());

  const AtomGradients grads = atoms_gradient(batch, fits, d);
  state.next_step();
  Dictionary& nd = out.dictionary;
  state.update(0, nd.atoms, grads.structure, cfg.lr_C);
  for (Matrix& a : nd.atoms) {
    a = project_symmetric(a);
    if (cfg.nonneg) a = project_nonneg(a);
  }
  if (nd.has_features()) state.update(1, nd.feature_atoms, grads.features, cfg.feature_lr());
  if (cfg.learn_h && nd.has_weights()) {
    const std::vector<Vector> gh = weight_atoms_gradient(fits, d, cfg.weight_grad_scale);
    std::vector<Matrix> params, gm;
    for (std::size_t s = 0; s < gh.size(); ++s) {
      params.emplace_back(nd.weight_atoms[s].values());
      gm.emplace_back(gh[s]);
    }
    state.update(2, params, gm, cfg.lr_h);
    for (std::size_t s = 0; s < gh.size(); ++s)
      nd.weight_atoms[s] = Histogram::renormalized(project_simplex(params[s].col(0)), 1e-9);
  }
  return out;
}

FitResult fit(const std::vector<GraphRepr>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) fail(ErrorCode::EmptyDataset, "cannot fit on an empty dataset");
  if (cfg.batch_size < 1 || cfg.epochs < 0) fail(ErrorCode::BadArgument, "batch size must be >= 1 and epochs >= 0");
  if (!(cfg.lr_C >= 0.0 && cfg.feature_lr() >= 0.0 && cfg.lr_h >= 0.0))
    fail(ErrorCode::BadArgument, "learning rates must be nonnegative");
  std::mt19937_64 rng(cfg.seed);
  FitResult res{init_dictionary(dataset, cfg, rng), LossTrace()};
  OptimizerState state(cfg.optimizer);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto B = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += B) {
      std::vector<GraphRepr> batch;
      for (std::size_t i = start; i < std::min(start + B, order.size()); ++i) batch.push_back(dataset[order[i]]);
      StepResult step = gdl_step(res.dictionary, batch, cfg, state);
      res.dictionary = std::move(step.dictionary);
      res.trace.push(step.loss);
    }
  }
  return res;
}

StreamResult fit_stream(const GraphSource& source, const TrainConfig& cfg, const StreamOptions& sopts) {
  std::vector<GraphRepr> batch = source();
  if (batch.empty()) fail(ErrorCode::EmptyDataset, "stream yielded no graphs");
  std::mt19937_64 rng(cfg.seed);
  Dictionary d = init_dictionary(batch, cfg, rng);
  OptimizerState state(Optimizer::Sgd);
  ChangeDetector detector(sopts.window, sopts.rho);
  StreamResult res{{}, LossTrace(sopts.window), {}};
  for (std::size_t step = 0; !batch.empty(); ++step, batch = source()) {
    StepResult out = gdl_step(d, batch, cfg, state);
    d = std::move(out.dictionary);
    const double mean = res.trace.push(out.value);
    if (detector.push(mean)) {
      res.trace.mark_event();
      res.events.push_back(step);
    }
    if (sopts.snapshot_every > 0 && (step + 1) % sopts.snapshot_every == 0) res.snapshots.push_back(d);
  }
  res.snapshots.push_back(std::move(d));
  return res;
}

}  // namespace gdl
