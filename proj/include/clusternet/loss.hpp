#pragma once

#include <cstdint>

#include "clusternet/dataset.hpp"
#include "clusternet/model.hpp"

namespace clusternet {

// Training objective: weighted binary cross-entropy over pairwise
// same-cluster probabilities plus cross-entropy on the cluster count.

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

struct LossWeights {
  double phi = 0.0;   // a-priori probability that a random pair is same-cluster
  double phi1 = 0.0;  // weight of the same-cluster term
  double phi2 = 0.0;  // weight of the different-cluster term
  double c = 0.0;     // normalizer making phi1 + phi2 == 2
};

struct LossValues {
  double l_ca = 0.0;
  double l_cc = 0.0;
  double lambda = 0.0;
  double l_tot = 0.0;
};

// P_ij(k): probability that elements i and j share a cluster given k.
double pair_prob_given_k(const ClusteringOutput& out, int i, int j, int k);

// P_ij: the same probability marginalized over the count distribution.
double pair_prob(const ClusteringOutput& out, int i, int j);

// Analytic class-balance weights for the pair loss. phi is the expected
// fraction of same-cluster pairs with k uniform on {1..k_max}: the harmonic
// form (1/k_max)·sum 1/k for independent-uniform labels, the exact value
// induced by balanced_sizes for the balanced policy (which depends on n).
LossWeights class_balance_weights(int n, int k_max, SizePolicy policy);

// Simulation estimate of phi for cross-checking the closed form:
// k ~ U{1..k_max}, two independent uniform labels per pair.
double monte_carlo_phi(int k_max, int pairs, std::uint64_t seed);

// L_ca = -2/(n(n-1)) sum_{i<j} [phi1·y_ij·log P_ij + phi2·(1-y_ij)·log(1-P_ij)]
double assignment_loss(const ClusteringOutput& out, const PairwiseLabels& y,
                       const LossWeights& w);

// L_cc = -log P(true_k), with P clamped from below.
double count_loss(const Eigen::VectorXd& count_dist, int true_k);

LossValues total_loss(double l_ca, double l_cc, double lambda);

// All three pieces for one labeled set.
LossValues set_loss(const ClusteringOutput& out, const PairwiseLabels& y,
                    int true_k, const LossWeights& w, double lambda);

// Gradient of scale·L_tot w.r.t. the output probabilities, accumulated into
// `grad`. Pairs whose P_ij sits in a clamped region contribute nothing.
void loss_backward(const ClusteringOutput& out, const PairwiseLabels& y,
                   int true_k, const LossWeights& w, double lambda,
                   double scale, OutputGrad& grad);

}  // namespace clusternet
