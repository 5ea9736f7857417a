#include "lnskd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lnskd {
namespace {

template <typename T>
void check_tau(T tau) {
  if (!(tau > T(0)) || !std::isfinite(static_cast<double>(tau))) {
    throw ConfigError("temperature tau must be positive and finite, got " + std::to_string(static_cast<double>(tau)));
  }
}

/// log-sum-exp of z / tau; also fills probs with softmax(z / tau).
template <typename T>
T softmax_into(std::span<const T> z, T tau, std::span<T> probs) {
  T m = z[0] / tau;
  for (T v : z) {
    if (!std::isfinite(static_cast<double>(v))) throw NumericError("non-finite logit");
    m = std::max(m, v / tau);
  }
  T denom = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] / tau - m);
    denom += probs[i];
  }
  for (auto& p : probs) p /= denom;
  return m + std::log(denom);
}

}  // namespace

template <typename T>
BasicSoftPrediction<T> temperature_softmax(const BasicTensor<T>& logits, T tau) {
  check_tau(tau);
  if (logits.rank() != 1) throw ShapeError("temperature_softmax expects logits of rank 1, got " + shape_to_string(logits.shape()));
  BasicTensor<T> probs(logits.shape());
  softmax_into<T>(logits.data(), tau, probs.data());
  return {probs, tau};
}

double cb_weight(double beta, std::uint64_t n) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("class-balance beta must lie in [0, 1), got " + std::to_string(beta));
  if (n < 1) throw ConfigError("class-balance sample count must be at least 1");
  // 1 - beta^n via expm1/log1p keeps precision for beta close to 1.
  const double denom = beta == 0.0 ? 1.0 : -std::expm1(static_cast<double>(n) * std::log(beta));
  return (1.0 - beta) / denom;
}

ClassBalanceTable::ClassBalanceTable(double beta, std::vector<std::uint64_t> class_counts, bool normalize)
    : beta_(beta), normalized_(normalize), counts_(std::move(class_counts)) {
  if (counts_.empty()) throw ConfigError("class-balance table needs at least one class");
  for (std::size_t c = 0; c < counts_.size(); ++c) {
    // A class absent from the training data gets the n=1 weight so the
    // table stays total over the label space.
    raw_.push_back(cb_weight(beta_, std::max<std::uint64_t>(counts_[c], 1)));
  }
  applied_ = raw_;
  if (normalized_) {
    const double total = std::accumulate(raw_.begin(), raw_.end(), 0.0);
    for (auto& w : applied_) w *= static_cast<double>(raw_.size()) / total;
  }
}

double ClassBalanceTable::raw_weight(std::size_t cls) const {
  if (cls >= raw_.size()) throw DataError("class " + std::to_string(cls) + " outside class-balance table");
  return raw_[cls];
}

double ClassBalanceTable::weight(std::size_t cls) const {
  if (cls >= applied_.size()) throw DataError("class " + std::to_string(cls) + " outside class-balance table");
  return applied_[cls];
}

template <typename T>
BasicTensor<T> cb_ce_loss_batch(BasicTape<T>* tape, std::span<const BasicTensor<T>> logits,
                                std::span<const std::size_t> labels, const ClassBalanceTable& table, T tau) {
  check_tau(tau);
  if (logits.empty()) throw ShapeError("cb_ce_loss: empty batch");
  if (logits.size() != labels.size()) {
    throw ShapeError("cb_ce_loss: " + std::to_string(logits.size()) + " logits but " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.size();
  const std::size_t M = logits[0].numel();
  std::vector<T> probs(n * M);
  std::vector<T> weights(n);
  T acc = 0;
  bool track = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (logits[i].rank() != 1 || logits[i].numel() != M) {
      throw ShapeError("cb_ce_loss: logits " + std::to_string(i) + " have shape " + shape_to_string(logits[i].shape()));
    }
    if (labels[i] >= M) {
      throw DataError("cb_ce_loss: label " + std::to_string(labels[i]) + " out of range for " + std::to_string(M) +
                      " classes");
    }
    weights[i] = static_cast<T>(table.weight(labels[i]));
    std::span<T> p(probs.data() + i * M, M);
    const T lse = softmax_into<T>(logits[i].data(), tau, p);
    acc += weights[i] * (lse - logits[i][labels[i]] / tau);
    track = track || logits[i].requires_grad();
  }
  const T inv_n = T(1) / static_cast<T>(n);
  auto out = BasicTensor<T>::scalar(acc * inv_n);

  if (tape && track) {
    out.set_requires_grad(true);
    std::vector<BasicTensor<T>> inputs(logits.begin(), logits.end());
    std::vector<std::size_t> ys(labels.begin(), labels.end());
    tape->record(out, [=, probs = std::move(probs), weights = std::move(weights)]() mutable {
      const T g = std::as_const(out).grad()[0] * inv_n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!inputs[i].requires_grad()) continue;
        auto gz = inputs[i].ensure_grad();
        const T c = g * weights[i] / tau;
        for (std::size_t k = 0; k < M; ++k) {
          gz[k] += c * (probs[i * M + k] - (k == ys[i] ? T(1) : T(0)));
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> cb_ce_loss(BasicTape<T>* tape, const BasicTensor<T>& logits, std::size_t label,
                          const ClassBalanceTable& table, T tau) {
  return cb_ce_loss_batch<T>(tape, std::span<const BasicTensor<T>>(&logits, 1), std::span<const std::size_t>(&label, 1),
                             table, tau);
}

template <typename T>
BasicTensor<T> skd_kl_loss(BasicTape<T>* tape, std::span<const BasicSoftPrediction<T>> prev,
                           std::span<const BasicTensor<T>> cur_logits, T tau) {
  check_tau(tau);
  if (prev.empty()) throw ShapeError("skd_kl_loss: empty batch");
  if (prev.size() != cur_logits.size()) {
    throw ShapeError("skd_kl_loss: " + std::to_string(prev.size()) + " teacher predictions but " +
                     std::to_string(cur_logits.size()) + " current logits");
  }
  const std::size_t n = prev.size();
  const std::size_t M = cur_logits[0].numel();
  std::vector<T> q(n * M);
  std::vector<T> p_sum(n);
  T acc = 0;
  bool track = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& teacher = prev[i].probabilities;
    if (cur_logits[i].rank() != 1 || cur_logits[i].numel() != M || teacher.numel() != M) {
      throw ShapeError("skd_kl_loss: sample " + std::to_string(i) + " has teacher " + shape_to_string(teacher.shape()) +
                       " and logits " + shape_to_string(cur_logits[i].shape()));
    }
    if (teacher.requires_grad() || teacher.has_grad()) {
      throw Error("skd_kl_loss: teacher prediction " + std::to_string(i) + " is attached to a gradient");
    }
    std::span<T> qi(q.data() + i * M, M);
    const T lse = softmax_into<T>(cur_logits[i].data(), tau, qi);
    T kl = 0;
    T ps = 0;
    for (std::size_t k = 0; k < M; ++k) {
      const T p = teacher[k];
      ps += p;
      // Equal probabilities have a zero log ratio; skipping them keeps KL(p||p) exactly 0.
      if (p > T(0) && p != qi[k]) kl += p * (std::log(p) - (cur_logits[i][k] / tau - lse));
    }
    p_sum[i] = ps;
    acc += std::max(kl, T(0));  // rounding can push a near-zero divergence below 0
    track = track || cur_logits[i].requires_grad();
  }
  const T factor = tau * tau / static_cast<T>(n);
  auto out = BasicTensor<T>::scalar(acc * factor);

  if (tape && track) {
    out.set_requires_grad(true);
    std::vector<BasicTensor<T>> inputs(cur_logits.begin(), cur_logits.end());
    std::vector<BasicTensor<T>> teachers;
    for (const auto& sp : prev) teachers.push_back(sp.probabilities);
    tape->record(out, [=, q = std::move(q), p_sum = std::move(p_sum)]() mutable {
      // d/dz_k [-sum_j p_j log q_j] = (q_k * sum_j p_j - p_k) / tau
      const T g = std::as_const(out).grad()[0] * factor / tau;
      for (std::size_t i = 0; i < n; ++i) {
        if (!inputs[i].requires_grad()) continue;
        auto gz = inputs[i].ensure_grad();
        for (std::size_t k = 0; k < M; ++k) {
          gz[k] += g * (q[i * M + k] * p_sum[i] - std::as_const(teachers[i])[k]);
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> total_loss(BasicTape<T>* tape, const BasicTensor<T>& cb, const BasicTensor<T>& skd, T lambda) {
  if (!(lambda >= T(0))) throw ConfigError("lambda must be non-negative");
  if (cb.numel() != 1 || skd.numel() != 1) throw ShapeError("total_loss expects scalar components");
  auto out = BasicTensor<T>::scalar(cb[0] + lambda * skd[0]);
  if (tape && (cb.requires_grad() || skd.requires_grad())) {
    out.set_requires_grad(true);
    tape->record(out, [=, cb = cb, skd = skd]() mutable {
      const T g = std::as_const(out).grad()[0];
      if (cb.requires_grad()) cb.ensure_grad()[0] += g;
      if (skd.requires_grad()) skd.ensure_grad()[0] += lambda * g;
    });
  }
  return out;
}

#define LNSKD_INSTANTIATE_LOSSES(T)                                                                             \
  template BasicSoftPrediction<T> temperature_softmax(const BasicTensor<T>&, T);                                \
  template BasicTensor<T> cb_ce_loss(BasicTape<T>*, const BasicTensor<T>&, std::size_t,                         \
                                     const ClassBalanceTable&, T);                                              \
  template BasicTensor<T> cb_ce_loss_batch(BasicTape<T>*, std::span<const BasicTensor<T>>,                      \
                                           std::span<const std::size_t>, const ClassBalanceTable&, T);          \
  template BasicTensor<T> skd_kl_loss(BasicTape<T>*, std::span<const BasicSoftPrediction<T>>,                  \
                                      std::span<const BasicTensor<T>>, T);                                      \
  template BasicTensor<T> total_loss(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&, T);

LNSKD_INSTANTIATE_LOSSES(float)
LNSKD_INSTANTIATE_LOSSES(double)

}  // namespace lnskd
