#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace clusternet {

// Synthetic 2D episode generation. Every operation here is a pure function
// of (spec, n, k, seed); parallel callers just split seeds.

enum class Family {
  GaussianBlobs,
  ConcentricRings,
  Moons,
  AnisotropicBlobs,
  UniformBoxes,
};

const char* family_name(Family f);
Family parse_family(const std::string& name);

// How the n points of a set are split among the k clusters.
enum class SizePolicy {
  IndependentUniform,  // each point picks a cluster uniformly; resample if any cluster is empty
  Balanced,            // sizes differ by at most one, order shuffled
};

const char* size_policy_name(SizePolicy p);
SizePolicy parse_size_policy(const std::string& name);

struct GeneratorSpec {
  std::vector<Family> families = {
      Family::GaussianBlobs, Family::ConcentricRings, Family::Moons,
      Family::AnisotropicBlobs, Family::UniformBoxes};
  int k_max = 5;
  SizePolicy size_policy = SizePolicy::IndependentUniform;

  // Per-family shape parameters. Values are in the raw generation frame;
  // every set is min-max normalized to [-1,1]^2 afterwards.
  double blob_sigma_min = 0.06;
  double blob_sigma_max = 0.15;
  double blob_separation = 0.70;   // minimum center-to-center distance
  double ring_noise = 0.04;        // radial std cap (shrinks with the ring gap)
  double moon_noise = 0.05;        // isotropic noise std around each arc
  double moon_separation = 0.60;   // minimum arc-center distance
  double aniso_ratio = 4.0;        // max major/minor axis ratio
  double box_half_min = 0.10;
  double box_half_max = 0.25;
  double box_gap = 0.05;           // minimum gap between box borders

  void validate() const;  // throws std::invalid_argument
};

struct LabeledSet {
  Eigen::Matrix2Xd points;   // 2 x n, normalized to [-1,1]^2
  std::vector<int> labels;   // values exactly {0..k-1}
  int k = 0;
  Family family = Family::GaussianBlobs;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(points.cols()); }
  void validate() const;  // checks the invariants above
};

struct PairwiseLabels {
  int n = 0;
  Eigen::MatrixXi y;  // n x n, symmetric, unit diagonal

  bool same(int i, int j) const { return y(i, j) != 0; }
};

struct MiniBatch {
  std::vector<LabeledSet> sets;
  std::vector<PairwiseLabels> pairwise;
};

// Draws n points from k shape-clusters of a family chosen uniformly from
// spec.families. Labels cover {0..k-1} with no empty cluster.
LabeledSet generate_set(const GeneratorSpec& spec, int n, int k,
                        std::uint64_t seed);

// y_ij = 1 iff labels[i] == labels[j].
PairwiseLabels pairwise_labels(const std::vector<int>& labels);

// N sets of n points each; per-set k drawn uniformly from {1..k_max}; each
// set shuffled. Requires n >= spec.k_max so every drawn k is feasible.
MiniBatch compose_minibatch(const GeneratorSpec& spec, int N, int n,
                            std::uint64_t seed);

// Permutes points and labels by one shared random permutation.
LabeledSet shuffle_set(const LabeledSet& set, std::uint64_t seed);

// Cluster sizes for the balanced policy: r = n mod k clusters of size
// ceil(n/k), the rest floor(n/k).
std::vector<int> balanced_sizes(int n, int k);

// Line-delimited JSON: one record per set,
// {"family":str,"k":int,"points":[[x,y],...],"labels":[int,...],"seed":int}
void write_dataset(std::ostream& out, const std::vector<LabeledSet>& sets);
void write_dataset_file(const std::string& path,
                        const std::vector<LabeledSet>& sets);
std::vector<LabeledSet> read_dataset(std::istream& in);
std::vector<LabeledSet> read_dataset_file(const std::string& path);

}  // namespace clusternet
