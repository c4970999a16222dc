#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clusternet/dataset.hpp"
#include "clusternet/model.hpp"

namespace clusternet {

// Partition quality scores and episodic evaluation against fresh sets.
// Both scores are invariant under relabeling of either argument.

// 1 - (best achievable matching accuracy under an optimal label
// correspondence), computed by min-cost assignment on the contingency
// matrix, padded square when the label counts differ.
double misclassification_rate(const std::vector<int>& pred,
                              const std::vector<int>& truth);

// 2·I(U;V) / (H(U) + H(V)) with natural logarithms; two single-cluster
// partitions score 1.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

struct Partition {
  int k = 0;
  double probability = 0.0;
  std::vector<int> labels;
};

struct PartitionPrediction {
  int k_pred = 0;
  std::vector<int> labels;        // the partition under k_pred
  std::vector<Partition> per_k;   // one entry per k = 1..k_max
};

// argmax over P(k) and per-element argmax over P(.|x_i, k_pred); ties pick
// the smallest k and the smallest cluster index.
PartitionPrediction predict_partition(const ClusteringOutput& out);

struct EpisodeRecord {
  int episode = 0;
  Family family = Family::GaussianBlobs;
  int k_true = 0;
  int k_pred = 0;
  double mr = 0.0;
  double nmi = 0.0;
};

struct EvalReport {
  int episodes = 0;
  double mr_mean = 0.0;
  double nmi_mean = 0.0;
  double count_accuracy = 0.0;
  std::vector<EpisodeRecord> per_episode;
};

// Runs `episodes` fresh shuffled sets of size n through the model. Episode
// seeds come from the evaluation stream of `seed`, disjoint from training.
EvalReport evaluate_model(const ModelParameters& params,
                          const GeneratorSpec& spec, int episodes, int n,
                          std::uint64_t seed);

// Classical baselines.
std::vector<int> kmeans_labels(const Eigen::Matrix2Xd& points, int k,
                               std::uint64_t seed);

struct DbscanParams {
  double eps = 0.2;
  int min_pts = 4;
};

// Density clustering; every noise point becomes its own singleton cluster so
// the result is always a full partition.
std::vector<int> dbscan_labels(const Eigen::Matrix2Xd& points,
                               const DbscanParams& params);

std::vector<int> random_labels(int n, int k, std::uint64_t seed);

struct BaselineParams {
  int k = 0;  // 0: use the set's true k (kmeans / random)
  DbscanParams dbscan;
  std::uint64_t seed = 0;
};

// name is one of "kmeans", "dbscan", "random".
std::vector<int> run_baseline(const std::string& name, const LabeledSet& set,
                              const BaselineParams& params);

// Grid search for DBSCAN parameters minimizing mean MR over a validation
// stream drawn from `spec` (tuning seeds, disjoint from evaluation).
DbscanParams tune_dbscan(const GeneratorSpec& spec, int n, int episodes,
                         std::uint64_t seed);

// Baseline counterpart of evaluate_model on the identical episode stream.
// DBSCAN uses per-family parameters where provided, defaults otherwise.
EvalReport evaluate_baseline(
    const std::string& name, const GeneratorSpec& spec, int episodes, int n,
    std::uint64_t seed,
    const std::map<Family, DbscanParams>& dbscan_by_family = {});

// Relabels pred so matched clusters share the truth's ids; unmatched
// predicted clusters get fresh ids past the truth's range. Used by plots to
// mark misassigned points.
std::vector<int> align_labels(const std::vector<int>& pred,
                              const std::vector<int>& truth);

void write_report_json(std::ostream& out, const EvalReport& report);
void write_report_csv(std::ostream& out, const EvalReport& report);
void write_report_json_file(const std::string& path, const EvalReport& report);
void write_report_csv_file(const std::string& path, const EvalReport& report);

}  // namespace clusternet
