#include "clusternet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "clusternet/io_error.hpp"
#include "clusternet/rng.hpp"

namespace clusternet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps arbitrary label values to dense ids 0..m-1 by first appearance.
std::vector<int> densify(const std::vector<int>& labels, int& count) {
  std::vector<int> dense(labels.size());
  std::map<int, int> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    dense[i] = it->second;
    (void)fresh;
  }
  count = static_cast<int>(ids.size());
  return dense;
}

Eigen::MatrixXd contingency(const std::vector<int>& pred,
                            const std::vector<int>& truth, int& a, int& b) {
  const std::vector<int> p = densify(pred, a);
  const std::vector<int> t = densify(truth, b);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(a, b);
  for (std::size_t i = 0; i < p.size(); ++i) c(p[i], t[i]) += 1.0;
  return c;
}

// Min-cost perfect assignment on a square cost matrix (potentials method).
// Returns the column chosen for each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0);
  std::vector<int> way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

void check_lengths(const std::vector<int>& pred,
                   const std::vector<int>& truth) {
  if (pred.empty() || truth.empty())
    throw std::invalid_argument("eval: empty label sequence");
  if (pred.size() != truth.size())
    throw std::invalid_argument("eval: label sequences differ in length");
}

// Optimal pred-cluster -> truth-cluster matching on the padded contingency.
std::vector<int> optimal_matching(const Eigen::MatrixXd& overlap) {
  const int s = static_cast<int>(std::max(overlap.rows(), overlap.cols()));
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(s, s);
  cost.topLeftCorner(overlap.rows(), overlap.cols()) = -overlap;
  return hungarian(cost);
}

LabeledSet draw_episode(const GeneratorSpec& spec, int n, std::uint64_t seed) {
  return compose_minibatch(spec, 1, n, seed).sets[0];
}

int distinct_labels(const std::vector<int>& labels) {
  int count = 0;
  densify(labels, count);
  return count;
}

EvalReport finalize(std::vector<EpisodeRecord> records) {
  EvalReport report;
  report.episodes = static_cast<int>(records.size());
  for (const EpisodeRecord& r : records) {
    report.mr_mean += r.mr;
    report.nmi_mean += r.nmi;
    report.count_accuracy += r.k_pred == r.k_true ? 1.0 : 0.0;
  }
  report.mr_mean /= report.episodes;
  report.nmi_mean /= report.episodes;
  report.count_accuracy /= report.episodes;
  report.per_episode = std::move(records);
  return report;
}

nlohmann::json record_json(const EpisodeRecord& r) {
  return {{"episode", r.episode}, {"family", family_name(r.family)},
          {"k_true", r.k_true},   {"k_pred", r.k_pred},
          {"mr", r.mr},           {"nmi", r.nmi}};
}

}  // namespace

double misclassification_rate(const std::vector<int>& pred,
                              const std::vector<int>& truth) {
  check_lengths(pred, truth);
  int a = 0;
  int b = 0;
  const Eigen::MatrixXd overlap = contingency(pred, truth, a, b);
  const std::vector<int> match = optimal_matching(overlap);
  double matched = 0.0;
  for (int r = 0; r < a; ++r)
    if (match[r] < b) matched += overlap(r, match[r]);
  return 1.0 - matched / static_cast<double>(pred.size());
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  int a = 0;
  int b = 0;
  const Eigen::MatrixXd c = contingency(pred, truth, a, b);
  const double n = static_cast<double>(pred.size());

  const Eigen::VectorXd rows = c.rowwise().sum();
  const Eigen::VectorXd cols = c.colwise().sum();
  double hu = 0.0;
  double hv = 0.0;
  for (int i = 0; i < a; ++i) hu -= rows(i) / n * std::log(rows(i) / n);
  for (int j = 0; j < b; ++j) hv -= cols(j) / n * std::log(cols(j) / n);
  if (hu + hv == 0.0) return 1.0;  // both partitions single-cluster

  double mi = 0.0;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j)
      if (c(i, j) > 0.0)
        mi += c(i, j) / n * std::log(n * c(i, j) / (rows(i) * cols(j)));
  return std::clamp(2.0 * mi / (hu + hv), 0.0, 1.0);
}

PartitionPrediction predict_partition(const ClusteringOutput& out) {
  out.validate();
  PartitionPrediction pred;
  pred.per_k.reserve(out.k_max);
  for (int k = 1; k <= out.k_max; ++k) {
    Partition part;
    part.k = k;
    part.probability = out.count_dist(k - 1);
    part.labels.resize(out.n);
    const int off = ClusteringOutput::group_offset(k);
    for (int i = 0; i < out.n; ++i) {
      int best = 0;
      for (int l = 1; l < k; ++l)
        if (out.assign(off + l, i) > out.assign(off + best, i)) best = l;
      part.labels[i] = best;
    }
    pred.per_k.push_back(std::move(part));
  }
  int best_k = 1;
  for (int k = 2; k <= out.k_max; ++k)
    if (out.count_dist(k - 1) > out.count_dist(best_k - 1)) best_k = k;
  pred.k_pred = best_k;
  pred.labels = pred.per_k[best_k - 1].labels;
  return pred;
}

EvalReport evaluate_model(const ModelParameters& params,
                          const GeneratorSpec& spec, int episodes, int n,
                          std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("eval: episodes must be >= 1");
  if (n < 2) throw std::invalid_argument("eval: sets need at least 2 elements");

  std::vector<EpisodeRecord> records;
  records.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    const LabeledSet set =
        draw_episode(spec, n, stream_seed(seed, SeedStream::Evaluation, ep));
    const ClusteringOutput out = forward(params, set.points);
    const PartitionPrediction pred = predict_partition(out);

    EpisodeRecord r;
    r.episode = ep;
    r.family = set.family;
    r.k_true = set.k;
    r.k_pred = pred.k_pred;
    r.mr = misclassification_rate(pred.labels, set.labels);
    r.nmi = nmi(pred.labels, set.labels);
    records.push_back(r);
  }
  return finalize(std::move(records));
}

std::vector<int> kmeans_labels(const Eigen::Matrix2Xd& points, int k,
                               std::uint64_t seed) {
  const int n = static_cast<int>(points.cols());
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds the point count");
  if (k == 1) return std::vector<int>(n, 0);

  std::mt19937_64 engine = make_engine(seed);
  std::vector<int> best_labels(n, 0);
  double best_inertia = kInf;

  for (int restart = 0; restart < 8; ++restart) {
    // k-means++ seeding.
    Eigen::Matrix2Xd centers(2, k);
    std::uniform_int_distribution<int> first(0, n - 1);
    centers.col(0) = points.col(first(engine));
    Eigen::VectorXd d2(n);
    for (int c = 1; c < k; ++c) {
      for (int i = 0; i < n; ++i) {
        double best = kInf;
        for (int j = 0; j < c; ++j)
          best = std::min(best, (points.col(i) - centers.col(j)).squaredNorm());
        d2(i) = best;
      }
      if (d2.sum() <= 0.0) {
        centers.col(c) = points.col(first(engine));
        continue;
      }
      std::discrete_distribution<int> pick(d2.data(), d2.data() + n);
      centers.col(c) = points.col(pick(engine));
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = (points.col(i) - centers.col(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d = (points.col(i) - centers.col(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (labels[i] != best) {
          labels[i] = best;
          changed = true;
        }
      }
      if (!changed) break;

      Eigen::Matrix2Xd sums = Eigen::Matrix2Xd::Zero(2, k);
      std::vector<int> counts(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.col(labels[i]) += points.col(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centers.col(c) = sums.col(c) / counts[c];
        } else {
          // Re-seed an empty cluster with the worst-fit point.
          int far = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double d =
                (points.col(i) - centers.col(labels[i])).squaredNorm();
            if (d > far_d) {
              far_d = d;
              far = i;
            }
          }
          centers.col(c) = points.col(far);
        }
      }
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      inertia += (points.col(i) - centers.col(labels[i])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

std::vector<int> dbscan_labels(const Eigen::Matrix2Xd& points,
                               const DbscanParams& params) {
  if (params.eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
  if (params.min_pts < 1)
    throw std::invalid_argument("dbscan: min_pts must be >= 1");
  const int n = static_cast<int>(points.cols());
  const double eps2 = params.eps * params.eps;

  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((points.col(i) - points.col(j)).squaredNorm() <= eps2)
        neighbors[i].push_back(j);  // includes i itself

  constexpr int kUnvisited = -1;
  constexpr int kNoise = -2;
  std::vector<int> labels(n, kUnvisited);
  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    if (static_cast<int>(neighbors[i].size()) < params.min_pts) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    std::vector<int> frontier = neighbors[i];
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const int j = frontier[f];
      if (labels[j] == kNoise) labels[j] = cluster;  // border point
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      if (static_cast<int>(neighbors[j].size()) >= params.min_pts)
        frontier.insert(frontier.end(), neighbors[j].begin(),
                        neighbors[j].end());
    }
    ++cluster;
  }
  // A full partition is required downstream: isolate remaining noise.
  for (int i = 0; i < n; ++i)
    if (labels[i] == kNoise) labels[i] = cluster++;
  return labels;
}

std::vector<int> random_labels(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("random baseline: bad sizes");
  std::mt19937_64 engine = make_engine(seed);
  std::uniform_int_distribution<int> dist(0, k - 1);
  std::vector<int> labels(n);
  for (int& l : labels) l = dist(engine);
  return labels;
}

std::vector<int> run_baseline(const std::string& name, const LabeledSet& set,
                              const BaselineParams& params) {
  const int k = params.k > 0 ? params.k : set.k;
  if (name == "kmeans") return kmeans_labels(set.points, k, params.seed);
  if (name == "dbscan") return dbscan_labels(set.points, params.dbscan);
  if (name == "random") return random_labels(set.n(), k, params.seed);
  throw std::invalid_argument("unknown baseline: " + name);
}

DbscanParams tune_dbscan(const GeneratorSpec& spec, int n, int episodes,
                         std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("tune_dbscan: episodes >= 1");
  std::vector<LabeledSet> sets;
  sets.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep)
    sets.push_back(
        draw_episode(spec, n, stream_seed(seed, SeedStream::Tuning, ep)));

  DbscanParams best;
  double best_mr = kInf;
  for (int step = 1; step <= 12; ++step) {
    for (int min_pts : {3, 4, 5}) {
      const DbscanParams cand{0.05 * step, min_pts};
      double mr = 0.0;
      for (const LabeledSet& set : sets)
        mr += misclassification_rate(dbscan_labels(set.points, cand),
                                     set.labels);
      mr /= episodes;
      if (mr < best_mr) {
        best_mr = mr;
        best = cand;
      }
    }
  }
  return best;
}

EvalReport evaluate_baseline(
    const std::string& name, const GeneratorSpec& spec, int episodes, int n,
    std::uint64_t seed, const std::map<Family, DbscanParams>& dbscan_by_family) {
  if (episodes < 1) throw std::invalid_argument("eval: episodes must be >= 1");

  std::vector<EpisodeRecord> records;
  records.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    const std::uint64_t ep_seed = stream_seed(seed, SeedStream::Evaluation, ep);
    const LabeledSet set = draw_episode(spec, n, ep_seed);

    BaselineParams params;
    params.seed = mix_seed(ep_seed, 0xba5e);
    const auto it = dbscan_by_family.find(set.family);
    if (it != dbscan_by_family.end()) params.dbscan = it->second;
    const std::vector<int> labels = run_baseline(name, set, params);

    EpisodeRecord r;
    r.episode = ep;
    r.family = set.family;
    r.k_true = set.k;
    r.k_pred = distinct_labels(labels);
    r.mr = misclassification_rate(labels, set.labels);
    r.nmi = nmi(labels, set.labels);
    records.push_back(r);
  }
  return finalize(std::move(records));
}

std::vector<int> align_labels(const std::vector<int>& pred,
                              const std::vector<int>& truth) {
  check_lengths(pred, truth);
  int a = 0;
  int b = 0;
  const std::vector<int> dense_pred = densify(pred, a);
  int ignored = 0;
  const Eigen::MatrixXd overlap = contingency(pred, truth, ignored, b);
  const std::vector<int> match = optimal_matching(overlap);

  // Truth ids in order of first appearance, mirroring densify.
  std::vector<int> truth_ids;
  {
    std::map<int, int> seen;
    for (int t : truth)
      if (seen.try_emplace(t, 0).second) truth_ids.push_back(t);
  }
  int fresh = 0;
  for (int t : truth_ids) fresh = std::max(fresh, t + 1);

  std::vector<int> target(a, -1);
  for (int r = 0; r < a; ++r)
    target[r] = match[r] < b ? truth_ids[match[r]] : fresh++;

  std::vector<int> aligned(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    aligned[i] = target[dense_pred[i]];
  return aligned;
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::json j;
  j["episodes"] = report.episodes;
  j["mr_mean"] = report.mr_mean;
  j["nmi_mean"] = report.nmi_mean;
  j["count_accuracy"] = report.count_accuracy;
  j["per_episode"] = nlohmann::json::array();
  for (const EpisodeRecord& r : report.per_episode)
    j["per_episode"].push_back(record_json(r));
  out << j.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "episode,family,k_true,k_pred,mr,nmi\n";
  out << std::setprecision(17);
  for (const EpisodeRecord& r : report.per_episode)
    out << r.episode << ',' << family_name(r.family) << ',' << r.k_true << ','
        << r.k_pred << ',' << r.mr << ',' << r.nmi << '\n';
}

namespace {

template <typename Writer>
void write_file(const std::string& path, const EvalReport& report, Writer w) {
  std::ofstream out(path);
  if (!out) throw IoError("eval: cannot open " + path);
  w(out, report);
  if (!out.good()) throw IoError("eval: failed writing " + path);
}

}  // namespace

void write_report_json_file(const std::string& path, const EvalReport& report) {
  write_file(path, report, write_report_json);
}

void write_report_csv_file(const std::string& path, const EvalReport& report) {
  write_file(path, report, write_report_csv);
}

}  // namespace clusternet
