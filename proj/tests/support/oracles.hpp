#pragma once

// Slow, independent reference implementations used to check the library.
// Nothing here calls into the code under test beyond reading model
// parameters through public accessors.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "msdhmm/msd_hmm.hpp"
#include "msdhmm/skeleton.hpp"

namespace oracle {

using msdhmm::MsdHmm;
using msdhmm::Symbol;
using msdhmm::SymbolSequence;

// b_j(o) computed directly as a product of powered probabilities.
inline double emission(const MsdHmm& m, std::size_t state, const std::vector<Symbol>& o) {
  double b = 1.0;
  for (std::size_t d = 0; d < m.streams(); ++d) {
    b *= std::pow(m.emission(state, d, o[d]), m.weights()[d]);
  }
  return b;
}

struct BruteForce {
  double probability = 0.0;              // P(O)
  std::vector<double> final_marginal;    // P(q_T = j | O)
};

// Sums over every one of the N^T state paths.
inline BruteForce enumerate_paths(const MsdHmm& m, const SymbolSequence& seq) {
  const std::size_t n = m.states();
  const std::size_t t_len = seq.size();
  std::vector<std::size_t> path(t_len, 0);
  BruteForce out;
  out.final_marginal.assign(n, 0.0);
  while (true) {
    double p = m.initial(path[0]) * emission(m, path[0], seq[0]);
    for (std::size_t t = 1; t < t_len && p > 0.0; ++t) {
      p *= m.transition(path[t - 1], path[t]) * emission(m, path[t], seq[t]);
    }
    out.probability += p;
    out.final_marginal[path.back()] += p;
    std::size_t k = 0;
    while (k < t_len && ++path[k] == n) path[k++] = 0;
    if (k == t_len) break;
  }
  for (auto& v : out.final_marginal) v /= out.probability;
  return out;
}

// Textbook forward recursion without any scaling.
inline double unscaled_forward(const MsdHmm& m, const SymbolSequence& seq) {
  const std::size_t n = m.states();
  std::vector<double> alpha(n), next(n);
  for (std::size_t j = 0; j < n; ++j) alpha[j] = m.initial(j) * emission(m, j, seq[0]);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += alpha[i] * m.transition(i, j);
      next[j] = s * emission(m, j, seq[t]);
    }
    alpha.swap(next);
  }
  double total = 0.0;
  for (double a : alpha) total += a;
  return total;
}

inline std::vector<double> random_distribution(std::size_t k, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> p(k);
  double s = 0.0;
  for (auto& v : p) s += (v = g(rng) + 1e-3);
  for (auto& v : p) v /= s;
  return p;
}

// Random left-right model with strictly positive allowed entries.
inline MsdHmm random_model(std::size_t states, std::size_t streams, int levels, std::mt19937_64& rng,
                           bool random_weights = false, int max_jump = 1) {
  std::vector<double> initial(states, 0.0);
  initial[0] = 1.0;
  std::vector<double> a(states * states, 0.0);
  for (std::size_t i = 0; i < states; ++i) {
    const std::size_t last = std::min(states - 1, i + static_cast<std::size_t>(max_jump));
    const auto row = random_distribution(last - i + 1, rng);
    for (std::size_t j = i; j <= last; ++j) a[i * states + j] = row[j - i];
  }
  std::vector<double> h;
  for (std::size_t j = 0; j < states * streams; ++j) {
    const auto row = random_distribution(static_cast<std::size_t>(levels), rng);
    h.insert(h.end(), row.begin(), row.end());
  }
  std::vector<double> w(streams, 1.0);
  if (random_weights) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& v : w) v = u(rng);
  }
  return MsdHmm(initial, a, h, w, streams, levels, max_jump);
}

inline std::size_t draw(const std::vector<double>& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng), acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (r < acc) return k;
  }
  return p.size() - 1;
}

inline SymbolSequence random_sequence(std::size_t length, std::size_t streams, int levels,
                                      std::mt19937_64& rng) {
  std::uniform_int_distribution<int> sym(0, levels - 1);
  SymbolSequence seq(length, std::vector<Symbol>(streams));
  for (auto& o : seq)
    for (auto& s : o) s = static_cast<Symbol>(sym(rng));
  return seq;
}

// Ancestral sampling from a model with unit weights.
inline SymbolSequence sample(const MsdHmm& m, std::size_t length, std::mt19937_64& rng) {
  const std::size_t n = m.states();
  SymbolSequence seq;
  std::size_t state = draw(m.initial(), rng);
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<Symbol> o(m.streams());
    for (std::size_t d = 0; d < m.streams(); ++d) {
      std::vector<double> h(static_cast<std::size_t>(m.levels()));
      for (std::size_t l = 0; l < h.size(); ++l) h[l] = m.emission(state, d, static_cast<Symbol>(l));
      o[d] = static_cast<Symbol>(draw(h, rng));
    }
    seq.push_back(std::move(o));
    std::vector<double> row(m.transitions().begin() + static_cast<std::ptrdiff_t>(state * n),
                            m.transitions().begin() + static_cast<std::ptrdiff_t>((state + 1) * n));
    state = draw(row, rng);
  }
  return seq;
}

// Straight transcription of the per-joint feature formula: position minus
// reference, then first and second backward differences with frame 0
// standing in for missing history.
inline std::vector<std::vector<double>> features(const std::vector<msdhmm::SkeletonFrame>& frames,
                                                 const std::vector<int>& joints, int ref) {
  auto pos = [&](std::size_t t, int j, int axis) {
    const auto& p = frames[t].joints[static_cast<std::size_t>(j)];
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
  };
  auto back = [](std::size_t t, std::size_t k) { return t >= k ? t - k : 0; };
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<double> row;
    for (int j : joints) {
      for (int a = 0; a < 3; ++a) row.push_back(pos(t, j, a) - pos(t, ref, a));
      for (int a = 0; a < 3; ++a) row.push_back(pos(t, j, a) - pos(back(t, 1), j, a));
      for (int a = 0; a < 3; ++a)
        row.push_back(pos(t, j, a) - 2.0 * pos(back(t, 1), j, a) + pos(back(t, 2), j, a));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace oracle
