#include "clusternet/metric.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace clusternet {

const char* metric_mode_name(MetricMode m) {
  switch (m) {
    case MetricMode::None: return "none";
    case MetricMode::Euclidean: return "euclidean";
    case MetricMode::Diagonal: return "diagonal";
    case MetricMode::Full: return "full";
  }
  throw std::logic_error("metric_mode_name: bad enum");
}

MetricMode parse_metric_mode(const std::string& name) {
  if (name == "none") return MetricMode::None;
  if (name == "euclidean") return MetricMode::Euclidean;
  if (name == "diagonal") return MetricMode::Diagonal;
  if (name == "full") return MetricMode::Full;
  throw std::invalid_argument("unknown metric mode: " + name);
}

MetricMatrix MetricMatrix::identity(int d, MetricMode mode) {
  if (mode == MetricMode::None) throw std::invalid_argument("MetricMatrix: mode none has no matrix");
  MetricMatrix m;
  m.a = Eigen::MatrixXd::Identity(d, d);
  m.mode = mode;
  m.d = d;
  return m;
}

void MetricMatrix::project() {
  switch (mode) {
    case MetricMode::None:
      break;
    case MetricMode::Euclidean:
      a = Eigen::MatrixXd::Identity(d, d);
      break;
    case MetricMode::Diagonal: {
      // PSD projection of a diagonal matrix is a diagonal clamp.
      const Eigen::VectorXd diag = a.diagonal().cwiseMax(0.0);
      a = diag.asDiagonal();
      break;
    }
    case MetricMode::Full:
      a = project_psd(a);
      break;
  }
}

bool MetricMatrix::satisfies_invariants(double tol) const {
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()),
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) return false;
  if (mode == MetricMode::Euclidean &&
      !a.isApprox(Eigen::MatrixXd::Identity(d, d))) {
    return false;
  }
  if (mode == MetricMode::Diagonal) {
    Eigen::MatrixXd off = a;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

double dissimilarity(const MetricMatrix& metric, const Eigen::VectorXd& zi,
                     const Eigen::VectorXd& zj) {
  if (zi.size() != zj.size() || zi.size() != metric.d) {
    throw std::invalid_argument("dissimilarity: dimension mismatch");
  }
  const Eigen::VectorXd diff = zi - zj;
  return diff.dot(metric.a * diff);
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("project_psd: matrix not square");
  if (!a.allFinite()) throw std::invalid_argument("project_psd: non-finite input");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out =
      eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd pairwise_distance_matrix(const MetricMatrix& metric,
                                         const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.cols();
  if (z.rows() != metric.d) throw std::invalid_argument("pairwise_distance_matrix: dimension mismatch");
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::VectorXd diff = z.col(i) - z.col(j);
      // (z_i-z_j)^T A (z_i-z_j) equals its own transpose, so the matrix is
      // symmetric even before A is projected.
      const double d2 = diff.dot(metric.a * diff);
      dist(i, j) = d2;
      dist(j, i) = d2;
    }
  }
  return dist;
}

Eigen::MatrixXd metric_block_forward(const MetricBlockParams& params,
                                     const Eigen::MatrixXd& z,
                                     double leaky_slope,
                                     MetricBlockCache* cache) {
  const Eigen::Index n = z.cols();
  if (params.w.cols() != n) {
    throw std::invalid_argument(
        "metric block: set size does not match the trained distance-row width");
  }
  Eigen::MatrixXd dist = pairwise_distance_matrix(params.metric, z);
  Eigen::MatrixXd pre = params.w * dist;
  pre.colwise() += params.b;
  Eigen::MatrixXd out =
      pre.unaryExpr([leaky_slope](double v) { return v >= 0.0 ? v : leaky_slope * v; });
  if (cache != nullptr) {
    cache->z = z;
    cache->dist = std::move(dist);
    cache->pre = std::move(pre);
  }
  return out;
}

void metric_block_backward(const MetricBlockParams& params,
                           const MetricBlockCache& cache,
                           const Eigen::MatrixXd& dout, double leaky_slope,
                           MetricBlockParams& grads, Eigen::MatrixXd& dz) {
  const Eigen::Index n = cache.z.cols();
  const Eigen::MatrixXd dpre = dout.cwiseProduct(cache.pre.unaryExpr(
      [leaky_slope](double v) { return v >= 0.0 ? 1.0 : leaky_slope; }));
  grads.w.noalias() += dpre * cache.dist.transpose();
  grads.b.noalias() += dpre.rowwise().sum();

  // ddist(a,b) is the gradient w.r.t. the matrix entry; entries (a,b) and
  // (b,a) are the same distance node, so their gradients sum.
  const Eigen::MatrixXd ddist = params.w.transpose() * dpre;
  const Eigen::MatrixXd a_sym = params.metric.a + params.metric.a.transpose();
  dz.setZero(cache.z.rows(), n);
  const bool train_a = params.metric.trainable();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double g = ddist(i, j) + ddist(j, i);
      if (g == 0.0) continue;
      const Eigen::VectorXd diff = cache.z.col(i) - cache.z.col(j);
      const Eigen::VectorXd pull = g * (a_sym * diff);
      dz.col(i) += pull;
      dz.col(j) -= pull;
      if (train_a) grads.metric.a.noalias() += g * diff * diff.transpose();
    }
  }
  if (params.metric.mode == MetricMode::Diagonal && train_a) {
    const Eigen::VectorXd diag = grads.metric.a.diagonal();
    grads.metric.a = diag.asDiagonal();
  }
}

}  // namespace clusternet
