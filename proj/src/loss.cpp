#include "clusternet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "clusternet/rng.hpp"

namespace clusternet {

namespace {

void check_pair(const ClusteringOutput& out, int i, int j) {
  if (i < 0 || j < 0 || i >= out.n || j >= out.n)
    throw std::invalid_argument("loss: element index out of range");
  if (i == j) throw std::invalid_argument("loss: pair needs distinct elements");
}

double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

// Expected same-cluster fraction of a balanced partition of n elements.
double balanced_phi(int n, int k) {
  const std::vector<int> sizes = balanced_sizes(n, k);
  double same = 0.0;
  for (int s : sizes) same += static_cast<double>(s) * (s - 1);
  return same / (static_cast<double>(n) * (n - 1));
}

}  // namespace

double pair_prob_given_k(const ClusteringOutput& out, int i, int j, int k) {
  check_pair(out, i, j);
  if (k < 1 || k > out.k_max)
    throw std::invalid_argument("loss: cluster count out of range");
  return out.assignment(i, k).dot(out.assignment(j, k));
}

double pair_prob(const ClusteringOutput& out, int i, int j) {
  check_pair(out, i, j);
  double p = 0.0;
  for (int k = 1; k <= out.k_max; ++k)
    p += out.count_dist(k - 1) * pair_prob_given_k(out, i, j, k);
  return p;
}

LossWeights class_balance_weights(int n, int k_max, SizePolicy policy) {
  if (k_max < 2)
    throw std::invalid_argument(
        "loss: k_max must be >= 2 (phi=1 degenerates the weights)");
  if (n < 2) throw std::invalid_argument("loss: need at least two elements");

  double phi = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    phi += policy == SizePolicy::Balanced ? balanced_phi(n, k) : 1.0 / k;
  }
  phi /= k_max;

  LossWeights w;
  w.phi = phi;
  w.c = 2.0 / (std::sqrt(1.0 - phi) + std::sqrt(phi));
  w.phi1 = w.c * std::sqrt(1.0 - phi);
  w.phi2 = w.c * std::sqrt(phi);
  return w;
}

double monte_carlo_phi(int k_max, int pairs, std::uint64_t seed) {
  if (k_max < 1 || pairs < 1)
    throw std::invalid_argument("loss: bad Monte-Carlo parameters");
  std::mt19937_64 engine = make_engine(seed);
  std::uniform_int_distribution<int> k_dist(1, k_max);
  long long same = 0;
  for (int t = 0; t < pairs; ++t) {
    const int k = k_dist(engine);
    std::uniform_int_distribution<int> label(1, k);
    if (label(engine) == label(engine)) ++same;
  }
  return static_cast<double>(same) / pairs;
}

double assignment_loss(const ClusteringOutput& out, const PairwiseLabels& y,
                       const LossWeights& w) {
  if (y.n != out.n)
    throw std::invalid_argument("loss: label matrix does not match output");
  if (out.n < 2) throw std::invalid_argument("loss: need at least two elements");

  double acc = 0.0;
  for (int i = 0; i < out.n; ++i) {
    for (int j = i + 1; j < out.n; ++j) {
      const double p = clamp_prob(pair_prob(out, i, j));
      acc += y.same(i, j) ? w.phi1 * std::log(p)
                          : w.phi2 * std::log(1.0 - p);
    }
  }
  const double n = out.n;
  return -2.0 / (n * (n - 1.0)) * acc;
}

double count_loss(const Eigen::VectorXd& count_dist, int true_k) {
  if (true_k < 1 || true_k > count_dist.size())
    throw std::invalid_argument("loss: true cluster count out of range");
  return -std::log(std::max(count_dist(true_k - 1), kProbClamp));
}

LossValues total_loss(double l_ca, double l_cc, double lambda) {
  if (lambda < 0.0)
    throw std::invalid_argument("loss: lambda must be non-negative");
  LossValues v;
  v.l_ca = l_ca;
  v.l_cc = l_cc;
  v.lambda = lambda;
  v.l_tot = l_cc + lambda * l_ca;
  return v;
}

LossValues set_loss(const ClusteringOutput& out, const PairwiseLabels& y,
                    int true_k, const LossWeights& w, double lambda) {
  return total_loss(assignment_loss(out, y, w),
                    count_loss(out.count_dist, true_k), lambda);
}

void loss_backward(const ClusteringOutput& out, const PairwiseLabels& y,
                   int true_k, const LossWeights& w, double lambda,
                   double scale, OutputGrad& grad) {
  if (true_k < 1 || true_k > out.k_max)
    throw std::invalid_argument("loss: true cluster count out of range");
  if (y.n != out.n)
    throw std::invalid_argument("loss: label matrix does not match output");

  // Count term: d(-log p)/dp = -1/p, zero once the clamp is active.
  const double p_true = out.count_dist(true_k - 1);
  if (p_true > kProbClamp)
    grad.d_count(true_k - 1) -= scale / p_true;

  const double n = out.n;
  const double prefactor = scale * lambda * -2.0 / (n * (n - 1.0));
  Eigen::VectorXd per_k(out.k_max);
  for (int i = 0; i < out.n; ++i) {
    for (int j = i + 1; j < out.n; ++j) {
      for (int k = 1; k <= out.k_max; ++k)
        per_k(k - 1) = pair_prob_given_k(out, i, j, k);
      const double p_raw = out.count_dist.dot(per_k);
      if (p_raw < kProbClamp || p_raw > 1.0 - kProbClamp) continue;

      // d L_ca / d P_ij, including the -2/(n(n-1)) prefactor and lambda.
      const double dp = prefactor * (y.same(i, j)
                                         ? w.phi1 / p_raw
                                         : -w.phi2 / (1.0 - p_raw));
      grad.d_count += dp * per_k;
      for (int k = 1; k <= out.k_max; ++k) {
        const int off = ClusteringOutput::group_offset(k);
        const double pk = out.count_dist(k - 1);
        grad.d_assign.col(i).segment(off, k) +=
            dp * pk * out.assign.col(j).segment(off, k);
        grad.d_assign.col(j).segment(off, k) +=
            dp * pk * out.assign.col(i).segment(off, k);
      }
    }
  }
}

}  // namespace clusternet
