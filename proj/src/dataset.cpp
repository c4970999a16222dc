#include "clusternet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>
#include <json.hpp>

#include "clusternet/io_error.hpp"
#include "clusternet/rng.hpp"

namespace clusternet {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Engine = std::mt19937_64;

double uniform(Engine& eng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(eng);
}

double gauss(Engine& eng, double mean, double std) {
  return std::normal_distribution<double>(mean, std)(eng);
}

// Draws labels for the independent-uniform policy: every point picks a
// cluster uniformly, whole assignment resampled until no cluster is empty.
std::vector<int> draw_labels_independent(Engine& eng, int n, int k) {
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (auto& l : labels) {
      l = pick(eng);
      ++counts[static_cast<std::size_t>(l)];
    }
    if (std::all_of(counts.begin(), counts.end(),
                    [](int c) { return c > 0; })) {
      return labels;
    }
  }
  throw std::runtime_error("draw_labels_independent: resampling did not terminate");
}

std::vector<int> draw_labels_balanced(Engine& eng, int n, int k) {
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  const std::vector<int> sizes = balanced_sizes(n, k);
  for (int c = 0; c < k; ++c) {
    labels.insert(labels.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(c)]), c);
  }
  std::shuffle(labels.begin(), labels.end(), eng);
  return labels;
}

std::vector<int> draw_labels(Engine& eng, int n, int k, SizePolicy policy) {
  return policy == SizePolicy::IndependentUniform
             ? draw_labels_independent(eng, n, k)
             : draw_labels_balanced(eng, n, k);
}

// Rejection-samples k centers in [-lim,lim]^2 with pairwise distance >= sep.
// The separation relaxes geometrically if placement keeps failing, so the
// loop terminates for any k.
std::vector<Eigen::Vector2d> place_centers(Engine& eng, int k, double sep,
                                           double lim) {
  std::vector<Eigen::Vector2d> centers;
  int failures = 0;
  while (static_cast<int>(centers.size()) < k) {
    Eigen::Vector2d c(uniform(eng, -lim, lim), uniform(eng, -lim, lim));
    bool ok = true;
    for (const auto& other : centers) {
      if ((c - other).norm() < sep) {
        ok = false;
        break;
      }
    }
    if (ok) {
      centers.push_back(c);
    } else if (++failures % 100 == 0) {
      sep *= 0.9;
    }
  }
  return centers;
}

Eigen::Matrix2Xd gen_gaussian_blobs(Engine& eng, const GeneratorSpec& spec,
                                    const std::vector<int>& labels, int k) {
  const auto centers = place_centers(eng, k, spec.blob_separation, 1.0);
  std::vector<double> sigma(static_cast<std::size_t>(k));
  for (auto& s : sigma) s = uniform(eng, spec.blob_sigma_min, spec.blob_sigma_max);

  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    pts.col(static_cast<Eigen::Index>(i)) =
        centers[c] + Eigen::Vector2d(gauss(eng, 0.0, sigma[c]),
                                     gauss(eng, 0.0, sigma[c]));
  }
  return pts;
}

Eigen::Matrix2Xd gen_concentric_rings(Engine& eng, const GeneratorSpec& spec,
                                      const std::vector<int>& labels, int k) {
  const Eigen::Vector2d center(uniform(eng, -0.2, 0.2), uniform(eng, -0.2, 0.2));
  const double r_lo = 0.35;
  const double r_hi = 1.0;
  const double gap = k > 1 ? (r_hi - r_lo) / (k - 1) : (r_hi - r_lo);
  std::vector<double> radius(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    radius[static_cast<std::size_t>(j)] =
        k > 1 ? r_lo + j * gap : 0.5 * (r_lo + r_hi);
  }
  const double noise = std::min(spec.ring_noise, gap / 6.0);

  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double theta = uniform(eng, 0.0, 2.0 * kPi);
    const double r = gauss(eng, radius[static_cast<std::size_t>(labels[i])], noise);
    pts.col(static_cast<Eigen::Index>(i)) =
        center + r * Eigen::Vector2d(std::cos(theta), std::sin(theta));
  }
  return pts;
}

Eigen::Matrix2Xd gen_moons(Engine& eng, const GeneratorSpec& spec,
                           const std::vector<int>& labels, int k) {
  const auto centers = place_centers(eng, k, spec.moon_separation, 0.8);
  std::vector<double> radius(static_cast<std::size_t>(k));
  std::vector<double> rot(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    radius[static_cast<std::size_t>(j)] = uniform(eng, 0.4, 0.7);
    rot[static_cast<std::size_t>(j)] = uniform(eng, 0.0, 2.0 * kPi);
  }

  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const double t = uniform(eng, 0.0, kPi) + rot[c];
    pts.col(static_cast<Eigen::Index>(i)) =
        centers[c] + radius[c] * Eigen::Vector2d(std::cos(t), std::sin(t)) +
        Eigen::Vector2d(gauss(eng, 0.0, spec.moon_noise),
                        gauss(eng, 0.0, spec.moon_noise));
  }
  return pts;
}

Eigen::Matrix2Xd gen_anisotropic_blobs(Engine& eng, const GeneratorSpec& spec,
                                       const std::vector<int>& labels, int k) {
  const auto centers = place_centers(eng, k, spec.blob_separation, 1.0);
  std::vector<Eigen::Matrix2d> axes(static_cast<std::size_t>(k));
  std::vector<Eigen::Vector2d> sigma(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double major = uniform(eng, 0.10, 0.22);
    const double ratio = uniform(eng, 2.0, spec.aniso_ratio);
    const double theta = uniform(eng, 0.0, kPi);
    axes[static_cast<std::size_t>(j)] =
        Eigen::Rotation2Dd(theta).toRotationMatrix();
    sigma[static_cast<std::size_t>(j)] = Eigen::Vector2d(major, major / ratio);
  }

  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const Eigen::Vector2d local(gauss(eng, 0.0, sigma[c].x()),
                                gauss(eng, 0.0, sigma[c].y()));
    pts.col(static_cast<Eigen::Index>(i)) = centers[c] + axes[c] * local;
  }
  return pts;
}

Eigen::Matrix2Xd gen_uniform_boxes(Engine& eng, const GeneratorSpec& spec,
                                   const std::vector<int>& labels, int k) {
  std::vector<Eigen::Vector2d> centers;
  std::vector<Eigen::Vector2d> half;
  double gap = spec.box_gap;
  int failures = 0;
  while (static_cast<int>(centers.size()) < k) {
    Eigen::Vector2d c(uniform(eng, -0.9, 0.9), uniform(eng, -0.9, 0.9));
    Eigen::Vector2d h(uniform(eng, spec.box_half_min, spec.box_half_max),
                      uniform(eng, spec.box_half_min, spec.box_half_max));
    bool ok = true;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const bool overlap_x = std::abs(c.x() - centers[j].x()) < h.x() + half[j].x() + gap;
      const bool overlap_y = std::abs(c.y() - centers[j].y()) < h.y() + half[j].y() + gap;
      if (overlap_x && overlap_y) {
        ok = false;
        break;
      }
    }
    if (ok) {
      centers.push_back(c);
      half.push_back(h);
    } else if (++failures % 100 == 0) {
      gap = std::max(0.0, gap - 0.01);
    }
  }

  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    pts.col(static_cast<Eigen::Index>(i)) =
        centers[c] + Eigen::Vector2d(uniform(eng, -half[c].x(), half[c].x()),
                                     uniform(eng, -half[c].y(), half[c].y()));
  }
  return pts;
}

// Min-max normalization to [-1,1] per dimension; a degenerate dimension
// collapses to 0.
void normalize_inplace(Eigen::Matrix2Xd& pts) {
  for (int d = 0; d < 2; ++d) {
    const double lo = pts.row(d).minCoeff();
    const double hi = pts.row(d).maxCoeff();
    if (hi - lo < 1e-12) {
      pts.row(d).setZero();
    } else {
      pts.row(d) = (2.0 * (pts.row(d).array() - lo) / (hi - lo) - 1.0).matrix();
    }
  }
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::GaussianBlobs: return "gaussian-blobs";
    case Family::ConcentricRings: return "concentric-rings";
    case Family::Moons: return "moons";
    case Family::AnisotropicBlobs: return "anisotropic-blobs";
    case Family::UniformBoxes: return "uniform-boxes";
  }
  throw std::logic_error("family_name: bad enum");
}

Family parse_family(const std::string& name) {
  if (name == "gaussian-blobs" || name == "blobs") return Family::GaussianBlobs;
  if (name == "concentric-rings" || name == "rings") return Family::ConcentricRings;
  if (name == "moons") return Family::Moons;
  if (name == "anisotropic-blobs" || name == "aniso") return Family::AnisotropicBlobs;
  if (name == "uniform-boxes" || name == "boxes") return Family::UniformBoxes;
  throw std::invalid_argument("unknown generator family: " + name);
}

const char* size_policy_name(SizePolicy p) {
  return p == SizePolicy::IndependentUniform ? "independent-uniform" : "balanced";
}

SizePolicy parse_size_policy(const std::string& name) {
  if (name == "independent-uniform") return SizePolicy::IndependentUniform;
  if (name == "balanced") return SizePolicy::Balanced;
  throw std::invalid_argument("unknown cluster-size policy: " + name);
}

void GeneratorSpec::validate() const {
  if (families.empty()) throw std::invalid_argument("generator spec: families empty");
  if (k_max < 1) throw std::invalid_argument("generator spec: k_max < 1");
  const double noise[] = {blob_sigma_min, blob_sigma_max, ring_noise,
                          moon_noise, box_half_min, box_half_max};
  for (double v : noise) {
    if (!(v > 0.0)) throw std::invalid_argument("generator spec: noise/scale parameters must be > 0");
  }
  if (blob_sigma_max < blob_sigma_min || box_half_max < box_half_min) {
    throw std::invalid_argument("generator spec: parameter range inverted");
  }
  if (aniso_ratio < 1.0) throw std::invalid_argument("generator spec: aniso_ratio < 1");
}

void LabeledSet::validate() const {
  if (points.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("labeled set: points/labels length mismatch");
  }
  if (k < 1) throw std::invalid_argument("labeled set: k < 1");
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0 || l >= k) throw std::invalid_argument("labeled set: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c : counts) {
    if (c == 0) throw std::invalid_argument("labeled set: empty cluster");
  }
}

std::vector<int> balanced_sizes(int n, int k) {
  std::vector<int> sizes(static_cast<std::size_t>(k), n / k);
  for (int i = 0; i < n % k; ++i) ++sizes[static_cast<std::size_t>(i)];
  return sizes;
}

LabeledSet generate_set(const GeneratorSpec& spec, int n, int k,
                        std::uint64_t seed) {
  spec.validate();
  if (k < 1 || k > spec.k_max) throw std::invalid_argument("generate_set: k out of range");
  if (n < 2) throw std::invalid_argument("generate_set: n < 2");
  if (k > n) throw std::invalid_argument("generate_set: k > n");

  Engine eng = make_engine(seed);
  const auto family = spec.families[std::uniform_int_distribution<std::size_t>(
      0, spec.families.size() - 1)(eng)];

  LabeledSet set;
  set.k = k;
  set.family = family;
  set.seed = seed;
  set.labels = draw_labels(eng, n, k, spec.size_policy);
  switch (family) {
    case Family::GaussianBlobs:
      set.points = gen_gaussian_blobs(eng, spec, set.labels, k);
      break;
    case Family::ConcentricRings:
      set.points = gen_concentric_rings(eng, spec, set.labels, k);
      break;
    case Family::Moons:
      set.points = gen_moons(eng, spec, set.labels, k);
      break;
    case Family::AnisotropicBlobs:
      set.points = gen_anisotropic_blobs(eng, spec, set.labels, k);
      break;
    case Family::UniformBoxes:
      set.points = gen_uniform_boxes(eng, spec, set.labels, k);
      break;
  }
  normalize_inplace(set.points);
  return set;
}

PairwiseLabels pairwise_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("pairwise_labels: empty labels");
  const int n = static_cast<int>(labels.size());
  PairwiseLabels pw;
  pw.n = n;
  pw.y.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      pw.y(i, j) = labels[static_cast<std::size_t>(i)] ==
                           labels[static_cast<std::size_t>(j)]
                       ? 1
                       : 0;
    }
  }
  return pw;
}

MiniBatch compose_minibatch(const GeneratorSpec& spec, int N, int n,
                            std::uint64_t seed) {
  spec.validate();
  if (N < 1) throw std::invalid_argument("compose_minibatch: N < 1");
  if (n < 2) throw std::invalid_argument("compose_minibatch: n < 2");
  if (n < spec.k_max) {
    throw std::invalid_argument("compose_minibatch: n < k_max makes some k draws infeasible");
  }

  Engine eng = make_engine(mix_seed(seed, 0xb17c));
  std::uniform_int_distribution<int> pick_k(1, spec.k_max);

  MiniBatch batch;
  batch.sets.reserve(static_cast<std::size_t>(N));
  batch.pairwise.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const int k = pick_k(eng);
    const auto idx = static_cast<std::uint64_t>(i);
    LabeledSet set = generate_set(spec, n, k, mix_seed(seed, idx, 1));
    set = shuffle_set(set, mix_seed(seed, idx, 2));
    batch.pairwise.push_back(pairwise_labels(set.labels));
    batch.sets.push_back(std::move(set));
  }
  return batch;
}

LabeledSet shuffle_set(const LabeledSet& set, std::uint64_t seed) {
  const int n = set.n();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Engine eng = make_engine(seed);
  std::shuffle(perm.begin(), perm.end(), eng);

  LabeledSet out = set;
  for (int i = 0; i < n; ++i) {
    const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
    out.points.col(i) = set.points.col(static_cast<Eigen::Index>(src));
    out.labels[static_cast<std::size_t>(i)] = set.labels[src];
  }
  return out;
}

void write_dataset(std::ostream& out, const std::vector<LabeledSet>& sets) {
  for (const auto& set : sets) {
    nlohmann::json rec;
    rec["family"] = family_name(set.family);
    rec["k"] = set.k;
    auto points = nlohmann::json::array();
    for (int i = 0; i < set.n(); ++i) {
      points.push_back({set.points(0, i), set.points(1, i)});
    }
    rec["points"] = std::move(points);
    rec["labels"] = set.labels;
    rec["seed"] = set.seed;
    out << rec.dump() << '\n';
  }
}

void write_dataset_file(const std::string& path,
                        const std::vector<LabeledSet>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_dataset(out, sets);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<LabeledSet> read_dataset(std::istream& in) {
  std::vector<LabeledSet> sets;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    LabeledSet set;
    set.family = parse_family(rec.at("family").get<std::string>());
    set.k = rec.at("k").get<int>();
    set.seed = rec.at("seed").get<std::uint64_t>();
    set.labels = rec.at("labels").get<std::vector<int>>();
    const auto& pts = rec.at("points");
    set.points.resize(2, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      set.points(0, static_cast<Eigen::Index>(i)) = pts[i].at(0).get<double>();
      set.points(1, static_cast<Eigen::Index>(i)) = pts[i].at(1).get<double>();
    }
    set.validate();
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<LabeledSet> read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return read_dataset(in);
}

}  // namespace clusternet
