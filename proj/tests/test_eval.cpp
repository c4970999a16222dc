#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "clusternet/eval.hpp"
#include "clusternet/rng.hpp"

using namespace clusternet;

namespace {

// Exhaustive MR: try every permutation of the padded label alphabet.
double brute_force_mr(const std::vector<int>& pred,
                      const std::vector<int>& truth, int alphabet) {
  std::vector<int> perm(alphabet);
  for (int i = 0; i < alphabet; ++i) perm[i] = i;
  int best = 0;
  do {
    int matched = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (perm[pred[i]] == truth[i]) ++matched;
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - static_cast<double>(best) / pred.size();
}

// Direct contingency-table NMI with plain maps, independent of the library.
double direct_nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const double n = static_cast<double>(pred.size());
  std::map<int, int> pu;
  std::map<int, int> tv;
  std::map<std::pair<int, int>, int> joint;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++pu[pred[i]];
    ++tv[truth[i]];
    ++joint[{pred[i], truth[i]}];
  }
  double hu = 0.0;
  for (auto& [l, c] : pu) hu -= c / n * std::log(c / n);
  double hv = 0.0;
  for (auto& [l, c] : tv) hv -= c / n * std::log(c / n);
  if (hu + hv == 0.0) return 1.0;
  double mi = 0.0;
  for (auto& [lv, c] : joint)
    mi += c / n * std::log(n * c / (double(pu[lv.first]) * tv[lv.second]));
  return std::clamp(2.0 * mi / (hu + hv), 0.0, 1.0);
}

}  // namespace

TEST_CASE("misclassification rate under optimal label correspondence") {
  CHECK(misclassification_rate({1, 1, 0, 0}, {0, 0, 1, 1}) == 0.0);
  CHECK(misclassification_rate({0, 1, 0, 1}, {0, 0, 1, 1}) == 0.5);
  CHECK(misclassification_rate({0, 0, 0}, {0, 1, 2}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(misclassification_rate({0, 1}, {0, 1, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(misclassification_rate({}, {}), std::invalid_argument);

  // Relabeling either side never changes the score.
  const std::vector<int> pred = {0, 1, 1, 2, 0, 2, 1};
  const std::vector<int> truth = {0, 0, 1, 2, 2, 2, 1};
  const double base = misclassification_rate(pred, truth);
  std::vector<int> relabeled(pred.size());
  const int map[3] = {2, 0, 1};
  for (std::size_t i = 0; i < pred.size(); ++i) relabeled[i] = map[pred[i]];
  CHECK(misclassification_rate(relabeled, truth) == base);
}

TEST_CASE("assignment-based MR equals the brute-force permutation minimum") {
  std::mt19937_64 engine(101);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + static_cast<int>(engine() % 7);  // up to 8
    const int labels = 1 + static_cast<int>(engine() % 4);
    std::vector<int> pred(n);
    std::vector<int> truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(engine() % labels);
      truth[i] = static_cast<int>(engine() % labels);
    }
    const double got = misclassification_rate(pred, truth);
    const double want = brute_force_mr(pred, truth, 4);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("normalized mutual information") {
  CHECK(nmi({0, 1, 0, 2}, {5, 7, 5, 9}) == 1.0);
  CHECK(nmi({0, 1, 0, 1}, {0, 0, 1, 1}) == 0.0);
  CHECK(nmi({3, 3, 3}, {1, 1, 1}) == 1.0);  // both single-cluster

  std::mt19937_64 engine(103);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(engine() % 10);
    std::vector<int> pred(n);
    std::vector<int> truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(engine() % 3);
      truth[i] = static_cast<int>(engine() % 3);
    }
    CHECK(std::abs(nmi(pred, truth) - direct_nmi(pred, truth)) < 1e-12);
    // Swapping transposes the contingency table; the summation order
    // changes, so symmetry holds to rounding only.
    CHECK(std::abs(nmi(pred, truth) - nmi(truth, pred)) < 1e-12);
    CHECK(nmi(pred, truth) >= 0.0);
    CHECK(nmi(pred, truth) <= 1.0);
  }
}

TEST_CASE("partition prediction picks the most probable count") {
  ClusteringOutput out;
  out.k_max = 3;
  out.n = 3;
  out.count_dist = Eigen::Vector3d(0.1, 0.7, 0.2);
  out.assign.resize(6, 3);
  // k=2 groups per element: [0.9,0.1], [0.2,0.8], [0.6,0.4].
  out.assign.col(0) << 1.0, 0.9, 0.1, 0.5, 0.3, 0.2;
  out.assign.col(1) << 1.0, 0.2, 0.8, 0.5, 0.3, 0.2;
  out.assign.col(2) << 1.0, 0.6, 0.4, 0.5, 0.3, 0.2;

  const PartitionPrediction pred = predict_partition(out);
  CHECK(pred.k_pred == 2);
  CHECK(pred.labels == std::vector<int>{0, 1, 0});
  REQUIRE(pred.per_k.size() == 3);
  CHECK(pred.per_k[0].labels == std::vector<int>{0, 0, 0});
  CHECK(pred.per_k[1].probability == 0.7);
  // The k=3 groups tie everywhere; the smallest index wins.
  CHECK(pred.per_k[2].labels == std::vector<int>{0, 0, 0});

  out.count_dist = Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3);
  CHECK(predict_partition(out).k_pred == 1);
}

TEST_CASE("kmeans recovers well-separated blobs") {
  std::mt19937_64 engine(107);
  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::Matrix2Xd points(2, 40);
  std::vector<int> truth(40);
  for (int i = 0; i < 40; ++i) {
    const bool second = i >= 20;
    truth[i] = second ? 1 : 0;
    points(0, i) = (second ? 10.0 : 0.0) + noise(engine);
    points(1, i) = (second ? 10.0 : 0.0) + noise(engine);
  }
  const std::vector<int> labels = kmeans_labels(points, 2, 55);
  CHECK(misclassification_rate(labels, truth) == 0.0);

  CHECK(kmeans_labels(points, 1, 1) == std::vector<int>(40, 0));
  CHECK(kmeans_labels(points, 2, 55) == labels);  // seeded determinism
  CHECK_THROWS_AS(kmeans_labels(points, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(kmeans_labels(points, 41, 1), std::invalid_argument);
}

TEST_CASE("concentric rings defeat centroid clustering") {
  GeneratorSpec spec;
  spec.families = {Family::ConcentricRings};
  const LabeledSet set = generate_set(spec, 100, 2, 1);
  const std::vector<int> labels = kmeans_labels(set.points, 2, 9);
  CHECK(misclassification_rate(labels, set.labels) > 0.2);
}

TEST_CASE("dbscan separates dense groups and isolates noise") {
  Eigen::Matrix2Xd points(2, 7);
  points << 0.0, 0.01, 0.02, 5.0, 5.01, 5.02, 50.0,
            0.0, 0.01, 0.02, 5.0, 5.01, 5.02, 50.0;
  const std::vector<int> labels = dbscan_labels(points, {0.1, 3});
  CHECK(labels[0] == labels[1]);
  CHECK(labels[1] == labels[2]);
  CHECK(labels[3] == labels[4]);
  CHECK(labels[4] == labels[5]);
  CHECK(labels[0] != labels[3]);
  // The outlier is a cluster of its own, not an unlabeled point.
  CHECK(labels[6] != labels[0]);
  CHECK(labels[6] != labels[3]);

  CHECK_THROWS_AS(dbscan_labels(points, {0.0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(dbscan_labels(points, {0.1, 0}), std::invalid_argument);
}

TEST_CASE("random baseline draws labels in range") {
  const std::vector<int> a = random_labels(200, 3, 77);
  CHECK(a.size() == 200);
  CHECK(*std::min_element(a.begin(), a.end()) >= 0);
  CHECK(*std::max_element(a.begin(), a.end()) <= 2);
  CHECK(a == random_labels(200, 3, 77));
  CHECK(a != random_labels(200, 3, 78));
}

TEST_CASE("baseline dispatch by name") {
  GeneratorSpec spec;
  spec.families = {Family::GaussianBlobs};
  const LabeledSet set = generate_set(spec, 20, 2, 5);

  BaselineParams params;
  params.seed = 3;
  CHECK(run_baseline("kmeans", set, params) ==
        kmeans_labels(set.points, 2, 3));
  CHECK(run_baseline("random", set, params) == random_labels(20, 2, 3));
  CHECK(run_baseline("dbscan", set, params) ==
        dbscan_labels(set.points, params.dbscan));
  CHECK_THROWS_AS(run_baseline("spectral", set, params),
                  std::invalid_argument);
}

TEST_CASE("model evaluation aggregates per-episode scores") {
  ModelConfig cfg;
  cfg.k_max = 3;
  cfg.layers = 1;
  cfg.fc_units = 8;
  cfg.count_units = 4;
  cfg.param_seed = 2;
  const ModelParameters params = ModelParameters::create(cfg);

  GeneratorSpec spec;
  spec.k_max = 3;
  spec.families = {Family::GaussianBlobs};

  const EvalReport report = evaluate_model(params, spec, 5, 8, 900);
  CHECK(report.episodes == 5);
  REQUIRE(report.per_episode.size() == 5);
  for (int ep = 0; ep < 5; ++ep) {
    const EpisodeRecord& r = report.per_episode[ep];
    CHECK(r.episode == ep);
    CHECK(r.mr >= 0.0);
    CHECK(r.mr <= 1.0);
    CHECK(r.nmi >= 0.0);
    CHECK(r.nmi <= 1.0);
    CHECK(r.k_true >= 1);
    CHECK(r.k_true <= 3);
  }

  const EvalReport again = evaluate_model(params, spec, 5, 8, 900);
  CHECK(again.mr_mean == report.mr_mean);
  CHECK(again.nmi_mean == report.nmi_mean);

  CHECK_THROWS_AS(evaluate_model(params, spec, 0, 8, 900),
                  std::invalid_argument);
}

TEST_CASE("a zeroed-head model predicts one cluster everywhere") {
  ModelConfig cfg;
  cfg.k_max = 4;
  cfg.layers = 1;
  cfg.fc_units = 8;
  cfg.count_units = 4;
  cfg.param_seed = 3;
  ModelParameters params = ModelParameters::create(cfg);
  params.assign.w.setZero();
  params.assign.b.setZero();
  params.count_fc2.w.setZero();
  params.count_fc2.b.setZero();

  GeneratorSpec spec;
  spec.k_max = 4;
  spec.families = {Family::GaussianBlobs};
  const int episodes = 200;
  const int n = 8;
  const std::uint64_t seed = 321;
  const EvalReport report = evaluate_model(params, spec, episodes, n, seed);

  // Reproduce the evaluation stream and score the single-cluster predictor.
  double acc = 0.0;
  double mr = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    const MiniBatch mb = compose_minibatch(
        spec, 1, n, stream_seed(seed, SeedStream::Evaluation, ep));
    const LabeledSet& set = mb.sets[0];
    if (set.k == 1) acc += 1.0;
    std::map<int, int> sizes;
    for (int l : set.labels) ++sizes[l];
    int biggest = 0;
    for (auto& [l, c] : sizes) biggest = std::max(biggest, c);
    mr += 1.0 - static_cast<double>(biggest) / n;
  }
  CHECK(report.count_accuracy == doctest::Approx(acc / episodes));
  CHECK(report.mr_mean == doctest::Approx(mr / episodes));
}

TEST_CASE("baseline evaluation shares the model's episode stream") {
  GeneratorSpec spec;
  spec.k_max = 3;
  spec.families = {Family::GaussianBlobs};

  const EvalReport km = evaluate_baseline("kmeans", spec, 50, 12, 777);
  const EvalReport rnd = evaluate_baseline("random", spec, 50, 12, 777);
  REQUIRE(km.episodes == 50);
  for (int ep = 0; ep < 50; ++ep) {
    CHECK(km.per_episode[ep].k_true == rnd.per_episode[ep].k_true);
    CHECK(km.per_episode[ep].family == rnd.per_episode[ep].family);
  }
  // Centroid clustering with the true k beats random assignment on blobs.
  CHECK(km.mr_mean < rnd.mr_mean);
}

TEST_CASE("dbscan tuning searches the grid deterministically") {
  GeneratorSpec spec;
  spec.k_max = 2;
  spec.families = {Family::GaussianBlobs};
  const DbscanParams a = tune_dbscan(spec, 16, 10, 42);
  const DbscanParams b = tune_dbscan(spec, 16, 10, 42);
  CHECK(a.eps == b.eps);
  CHECK(a.min_pts == b.min_pts);
  CHECK(a.eps > 0.0);
  CHECK(a.min_pts >= 3);
  CHECK(a.min_pts <= 5);
}

TEST_CASE("label alignment maps matched clusters onto the truth ids") {
  CHECK(align_labels({1, 1, 0, 0}, {0, 0, 1, 1}) ==
        std::vector<int>{0, 0, 1, 1});

  const std::vector<int> aligned = align_labels({0, 0, 1, 2}, {0, 0, 1, 1});
  CHECK(aligned[0] == 0);
  CHECK(aligned[1] == 0);
  // One of the two split clusters claims truth id 1, the other is fresh.
  std::vector<int> tail = {aligned[2], aligned[3]};
  std::sort(tail.begin(), tail.end());
  CHECK(tail == std::vector<int>{1, 2});

  // Alignment never changes the score.
  std::mt19937_64 engine(109);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> pred(10);
    std::vector<int> truth(10);
    for (int i = 0; i < 10; ++i) {
      pred[i] = static_cast<int>(engine() % 4);
      truth[i] = static_cast<int>(engine() % 3);
    }
    const std::vector<int> al = align_labels(pred, truth);
    CHECK(misclassification_rate(al, truth) ==
          misclassification_rate(pred, truth));
    CHECK(std::abs(nmi(al, truth) - nmi(pred, truth)) < 1e-12);
  }
}

TEST_CASE("evaluation reports serialize to JSON and CSV") {
  GeneratorSpec spec;
  spec.k_max = 2;
  spec.families = {Family::GaussianBlobs};
  const EvalReport report = evaluate_baseline("kmeans", spec, 4, 10, 5);

  std::stringstream js;
  write_report_json(js, report);
  const nlohmann::json parsed = nlohmann::json::parse(js.str());
  CHECK(parsed["episodes"] == 4);
  CHECK(parsed["per_episode"].size() == 4);
  CHECK(parsed["mr_mean"].get<double>() == report.mr_mean);

  std::stringstream cs;
  write_report_csv(cs, report);
  int lines = 0;
  std::string line;
  while (std::getline(cs, line)) ++lines;
  CHECK(lines == 5);  // header + one row per episode
}
