#include "clusternet/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "clusternet/rng.hpp"

namespace clusternet {

namespace {

void fill_uniform(std::mt19937_64& engine, Eigen::Ref<Eigen::MatrixXd> mat,
                  double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  double* p = mat.data();
  for (Eigen::Index i = 0; i < mat.size(); ++i) p[i] = dist(engine);
}

LstmParams init_lstm(std::mt19937_64& engine, int input_dim, int hidden) {
  LstmParams p;
  p.w_x.resize(4 * hidden, input_dim);
  p.w_h.resize(4 * hidden, hidden);
  p.b = Eigen::VectorXd::Zero(4 * hidden);
  fill_uniform(engine, p.w_x, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  fill_uniform(engine, p.w_h, 1.0 / std::sqrt(static_cast<double>(hidden)));
  p.b.segment(hidden, hidden).setOnes();  // open forget gates at the start
  return p;
}

LstmParams zero_lstm(int input_dim, int hidden) {
  LstmParams p;
  p.w_x = Eigen::MatrixXd::Zero(4 * hidden, input_dim);
  p.w_h = Eigen::MatrixXd::Zero(4 * hidden, hidden);
  p.b = Eigen::VectorXd::Zero(4 * hidden);
  return p;
}

DenseParams init_dense(std::mt19937_64& engine, int out_dim, int in_dim) {
  DenseParams p;
  p.w.resize(out_dim, in_dim);
  p.b = Eigen::VectorXd::Zero(out_dim);
  fill_uniform(engine, p.w, 1.0 / std::sqrt(static_cast<double>(in_dim)));
  return p;
}

DenseParams zero_dense(int out_dim, int in_dim) {
  DenseParams p;
  p.w = Eigen::MatrixXd::Zero(out_dim, in_dim);
  p.b = Eigen::VectorXd::Zero(out_dim);
  return p;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double leaky(double x, double slope) { return x >= 0.0 ? x : slope * x; }

double leaky_grad(double pre, double slope) {
  return pre >= 0.0 ? 1.0 : slope;
}

// Single-direction pass over x (d x T). Returns h (hidden x T).
Eigen::MatrixXd lstm_forward(const LstmParams& p, const Eigen::MatrixXd& x,
                             LstmCache* cache) {
  const int h = p.hidden();
  const Eigen::Index t_len = x.cols();
  // One GEMM for the input contribution of every step.
  Eigen::MatrixXd zx = p.w_x * x;
  zx.colwise() += p.b;

  Eigen::MatrixXd gates(4 * h, t_len);
  Eigen::MatrixXd cs(h, t_len);
  Eigen::MatrixXd tanh_cs(h, t_len);
  Eigen::MatrixXd hs(h, t_len);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::VectorXd z = zx.col(t) + p.w_h * h_prev;
    auto gi = gates.col(t).segment(0, h);
    auto gf = gates.col(t).segment(h, h);
    auto gg = gates.col(t).segment(2 * h, h);
    auto go = gates.col(t).segment(3 * h, h);
    gi = z.segment(0, h).unaryExpr([](double v) { return sigmoid(v); });
    gf = z.segment(h, h).unaryExpr([](double v) { return sigmoid(v); });
    gg = z.segment(2 * h, h).array().tanh().matrix();
    go = z.segment(3 * h, h).unaryExpr([](double v) { return sigmoid(v); });

    cs.col(t) = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gg);
    tanh_cs.col(t) = cs.col(t).array().tanh().matrix();
    hs.col(t) = go.cwiseProduct(tanh_cs.col(t));

    h_prev = hs.col(t);
    c_prev = cs.col(t);
  }

  if (cache != nullptr) {
    cache->x = x;
    cache->gates = std::move(gates);
    cache->c = std::move(cs);
    cache->tanh_c = std::move(tanh_cs);
    cache->h = hs;
  }
  return hs;
}

// BPTT for one direction. Returns d(loss)/dx and accumulates into grads.
Eigen::MatrixXd lstm_backward(const LstmParams& p, const LstmCache& cache,
                              const Eigen::MatrixXd& dh_ext,
                              LstmParams& grads) {
  const int h = p.hidden();
  const Eigen::Index t_len = cache.x.cols();
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(cache.x.rows(), t_len);

  Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dz(4 * h);
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    const auto gi = cache.gates.col(t).segment(0, h);
    const auto gf = cache.gates.col(t).segment(h, h);
    const auto gg = cache.gates.col(t).segment(2 * h, h);
    const auto go = cache.gates.col(t).segment(3 * h, h);
    const auto tc = cache.tanh_c.col(t);

    const Eigen::VectorXd dh = dh_ext.col(t) + dh_carry;
    const Eigen::VectorXd dc =
        dc_carry +
        dh.cwiseProduct(go).cwiseProduct(
            (1.0 - tc.array().square()).matrix());

    const Eigen::VectorXd d_o = dh.cwiseProduct(tc);
    const Eigen::VectorXd d_i = dc.cwiseProduct(gg);
    const Eigen::VectorXd d_g = dc.cwiseProduct(gi);
    Eigen::VectorXd d_f(h);
    if (t > 0) {
      d_f = dc.cwiseProduct(cache.c.col(t - 1));
    } else {
      d_f.setZero();
    }
    dc_carry = dc.cwiseProduct(gf);

    dz.segment(0, h) =
        d_i.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
    dz.segment(h, h) =
        d_f.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
    dz.segment(2 * h, h) =
        d_g.cwiseProduct((1.0 - gg.array().square()).matrix());
    dz.segment(3 * h, h) =
        d_o.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());

    grads.w_x += dz * cache.x.col(t).transpose();
    if (t > 0) grads.w_h += dz * cache.h.col(t - 1).transpose();
    grads.b += dz;

    dx.col(t) = p.w_x.transpose() * dz;
    dh_carry = p.w_h.transpose() * dz;
  }
  return dx;
}

// Both directions, outputs stacked [forward; backward] per step.
Eigen::MatrixXd bdlstm_forward(const BdLstmParams& params,
                               const Eigen::MatrixXd& seq, BdCache* cache) {
  const Eigen::MatrixXd h_fw =
      lstm_forward(params.fw, seq, cache != nullptr ? &cache->fw : nullptr);
  const Eigen::MatrixXd rev = seq.rowwise().reverse();
  const Eigen::MatrixXd h_bw_rev =
      lstm_forward(params.bw, rev, cache != nullptr ? &cache->bw : nullptr);

  Eigen::MatrixXd out(h_fw.rows() * 2, seq.cols());
  out.topRows(h_fw.rows()) = h_fw;
  out.bottomRows(h_fw.rows()) = h_bw_rev.rowwise().reverse();
  return out;
}

Eigen::MatrixXd bdlstm_backward(const BdLstmParams& params,
                                const BdCache& cache,
                                const Eigen::MatrixXd& dout,
                                BdLstmParams& grads) {
  const int h = params.fw.hidden();
  const Eigen::MatrixXd dx_fw =
      lstm_backward(params.fw, cache.fw, dout.topRows(h), grads.fw);
  const Eigen::MatrixXd dout_bw_rev = dout.bottomRows(h).rowwise().reverse();
  const Eigen::MatrixXd dx_bw_rev =
      lstm_backward(params.bw, cache.bw, dout_bw_rev, grads.bw);
  return dx_fw + dx_bw_rev.rowwise().reverse();
}

void push_dense(std::vector<TensorView>& views, const std::string& prefix,
                DenseParams& p) {
  views.push_back({prefix + ".w", p.w.data(), p.w.rows(), p.w.cols(), true});
  views.push_back({prefix + ".b", p.b.data(), p.b.size(), 1, true});
}

void push_lstm(std::vector<TensorView>& views, const std::string& prefix,
               LstmParams& p) {
  views.push_back(
      {prefix + ".w_x", p.w_x.data(), p.w_x.rows(), p.w_x.cols(), true});
  views.push_back(
      {prefix + ".w_h", p.w_h.data(), p.w_h.rows(), p.w_h.cols(), true});
  views.push_back({prefix + ".b", p.b.data(), p.b.size(), 1, true});
}

}  // namespace

void ModelConfig::validate() const {
  if (k_max < 2) throw std::invalid_argument("model: k_max must be >= 2");
  if (layers < 1) throw std::invalid_argument("model: layers must be >= 1");
  if (fc_units < 2 || fc_units % 2 != 0)
    throw std::invalid_argument("model: fc_units must be even and >= 2");
  if (count_units < 2 || count_units % 2 != 0)
    throw std::invalid_argument("model: count_units must be even and >= 2");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw std::invalid_argument("model: leaky_slope must lie in (0, 1)");
  if (embedding == EmbeddingKind::Identity2D && embedding_dim != 2)
    throw std::invalid_argument(
        "model: identity-2d embedding requires embedding_dim == 2");
  if (embedding_dim < 1)
    throw std::invalid_argument("model: embedding_dim must be >= 1");
  if (metric_mode != MetricMode::None && metric_set_size < 2)
    throw std::invalid_argument(
        "model: metric modes need metric_set_size >= 2 (distance-row width)");
}

void ClusteringOutput::validate(double tol) const {
  if (count_dist.size() != k_max)
    throw std::runtime_error("output: count distribution has wrong length");
  if (assign.rows() != k_max * (k_max + 1) / 2 || assign.cols() != n)
    throw std::runtime_error("output: assignment matrix has wrong shape");
  auto check_simplex = [tol](const auto& v, const char* what) {
    if (v.minCoeff() < -tol)
      throw std::runtime_error(std::string("output: negative probability in ") +
                               what);
    if (std::abs(v.sum() - 1.0) > tol)
      throw std::runtime_error(std::string("output: ") + what +
                               " does not sum to 1");
  };
  check_simplex(count_dist, "count distribution");
  for (int i = 0; i < n; ++i)
    for (int k = 1; k <= k_max; ++k)
      check_simplex(assignment(i, k), "assignment group");
}

OutputGrad OutputGrad::zeros(const ClusteringOutput& out) {
  OutputGrad g;
  g.d_count = Eigen::VectorXd::Zero(out.count_dist.size());
  g.d_assign = Eigen::MatrixXd::Zero(out.assign.rows(), out.assign.cols());
  return g;
}

ModelParameters ModelParameters::create(const ModelConfig& config) {
  config.validate();
  ModelParameters p;
  p.config = config;
  std::mt19937_64 engine = make_engine(
      stream_seed(config.param_seed, SeedStream::Params, 0));

  const int e = config.embedding_dim;
  const int f = config.fc_units;
  const int c = config.count_units;
  const int proj_width =
      (config.metric_mode != MetricMode::None && config.metric_concat)
          ? f / 2
          : f;

  p.proj = init_dense(engine, proj_width, e);
  if (config.metric_mode != MetricMode::None) {
    MetricBlockParams mb;
    mb.metric = MetricMatrix::identity(proj_width, config.metric_mode);
    const int n = config.metric_set_size;
    mb.w.resize(proj_width, n);
    fill_uniform(engine, mb.w, 1.0 / std::sqrt(static_cast<double>(n)));
    mb.b = Eigen::VectorXd::Zero(proj_width);
    p.metric = std::move(mb);
  }
  p.trunk.reserve(config.layers);
  for (int l = 0; l < config.layers; ++l) {
    BdLstmParams layer;
    layer.fw = init_lstm(engine, f, f / 2);
    layer.bw = init_lstm(engine, f, f / 2);
    p.trunk.push_back(std::move(layer));
  }
  p.assign = init_dense(engine, config.assignment_logits(), f);
  p.count_rnn.fw = init_lstm(engine, f, c / 2);
  p.count_rnn.bw = init_lstm(engine, f, c / 2);
  p.count_fc1 = init_dense(engine, 2 * c, 2 * c);
  p.count_fc2 = init_dense(engine, config.k_max, 2 * c);
  return p;
}

ModelParameters ModelParameters::zeros(const ModelConfig& config) {
  config.validate();
  ModelParameters p;
  p.config = config;
  const int e = config.embedding_dim;
  const int f = config.fc_units;
  const int c = config.count_units;
  const int proj_width =
      (config.metric_mode != MetricMode::None && config.metric_concat)
          ? f / 2
          : f;

  p.proj = zero_dense(proj_width, e);
  if (config.metric_mode != MetricMode::None) {
    MetricBlockParams mb;
    mb.metric.mode = config.metric_mode;
    mb.metric.d = proj_width;
    mb.metric.a = Eigen::MatrixXd::Zero(proj_width, proj_width);
    mb.w = Eigen::MatrixXd::Zero(proj_width, config.metric_set_size);
    mb.b = Eigen::VectorXd::Zero(proj_width);
    p.metric = std::move(mb);
  }
  for (int l = 0; l < config.layers; ++l) {
    BdLstmParams layer;
    layer.fw = zero_lstm(f, f / 2);
    layer.bw = zero_lstm(f, f / 2);
    p.trunk.push_back(std::move(layer));
  }
  p.assign = zero_dense(config.assignment_logits(), f);
  p.count_rnn.fw = zero_lstm(f, c / 2);
  p.count_rnn.bw = zero_lstm(f, c / 2);
  p.count_fc1 = zero_dense(2 * c, 2 * c);
  p.count_fc2 = zero_dense(config.k_max, 2 * c);
  return p;
}

std::vector<TensorView> ModelParameters::tensors() {
  std::vector<TensorView> views;
  push_dense(views, "proj", proj);
  if (metric.has_value()) {
    views.push_back({"metric.a", metric->metric.a.data(),
                     metric->metric.a.rows(), metric->metric.a.cols(),
                     metric->metric.trainable()});
    views.push_back(
        {"metric.w", metric->w.data(), metric->w.rows(), metric->w.cols(),
         true});
    views.push_back({"metric.b", metric->b.data(), metric->b.size(), 1, true});
  }
  for (std::size_t l = 0; l < trunk.size(); ++l) {
    const std::string base = "trunk." + std::to_string(l);
    push_lstm(views, base + ".fw", trunk[l].fw);
    push_lstm(views, base + ".bw", trunk[l].bw);
  }
  push_dense(views, "assign", assign);
  push_lstm(views, "count.rnn.fw", count_rnn.fw);
  push_lstm(views, "count.rnn.bw", count_rnn.bw);
  push_dense(views, "count.fc1", count_fc1);
  push_dense(views, "count.fc2", count_fc2);
  return views;
}

std::vector<ConstTensorView> ModelParameters::tensors() const {
  auto mutable_views = const_cast<ModelParameters*>(this)->tensors();
  std::vector<ConstTensorView> views;
  views.reserve(mutable_views.size());
  for (const TensorView& v : mutable_views)
    views.push_back({v.name, v.data, v.rows, v.cols, v.trainable});
  return views;
}

void ModelParameters::set_zero() {
  for (TensorView& v : tensors())
    Eigen::Map<Eigen::VectorXd>(v.data, v.size()).setZero();
}

Eigen::Index ModelParameters::parameter_count() const {
  Eigen::Index total = 0;
  for (const ConstTensorView& v : tensors()) total += v.size();
  return total;
}

bool ModelParameters::all_finite() const {
  for (const ConstTensorView& v : tensors()) {
    const Eigen::Map<const Eigen::VectorXd> m(v.data, v.size());
    if (!m.allFinite()) return false;
  }
  return true;
}

Eigen::MatrixXd embed(const ModelConfig& config, const Eigen::MatrixXd& raw) {
  if (raw.rows() != config.embedding_dim)
    throw std::invalid_argument("embed: input dimension mismatch");
  // Identity2D and precomputed custom vectors both pass through unchanged.
  return raw;
}

Eigen::MatrixXd rbdlstm_forward(const BdLstmParams& params,
                                const Eigen::MatrixXd& seq, BdCache* cache) {
  if (params.fw.hidden() * 2 != seq.rows())
    throw std::invalid_argument(
        "rbdlstm: residual layer needs hidden == features/2");
  return seq + bdlstm_forward(params, seq, cache);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

Eigen::MatrixXd assignment_head(const DenseParams& params,
                                const Eigen::MatrixXd& features, int k_max,
                                Eigen::MatrixXd* logits) {
  Eigen::MatrixXd z = params.w * features;
  z.colwise() += params.b;
  if (z.rows() != k_max * (k_max + 1) / 2)
    throw std::invalid_argument("assignment_head: logit count mismatch");
  Eigen::MatrixXd probs(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    for (int k = 1; k <= k_max; ++k) {
      const int off = ClusteringOutput::group_offset(k);
      probs.col(i).segment(off, k) = softmax(z.col(i).segment(off, k));
    }
  }
  if (logits != nullptr) *logits = std::move(z);
  return probs;
}

Eigen::VectorXd count_head(const BdLstmParams& rnn, const DenseParams& fc1,
                           const DenseParams& fc2,
                           const Eigen::MatrixXd& features, double leaky_slope,
                           CountHeadCache* cache) {
  if (features.cols() < 2)
    throw std::invalid_argument("count_head: needs a sequence of length >= 2");
  const Eigen::MatrixXd g =
      bdlstm_forward(rnn, features, cache != nullptr ? &cache->rnn : nullptr);
  Eigen::VectorXd q(2 * g.rows());
  q.head(g.rows()) = g.col(0);
  q.tail(g.rows()) = g.col(g.cols() - 1);

  const Eigen::VectorXd fc1_pre = fc1.w * q + fc1.b;
  const Eigen::VectorXd f = fc1_pre.unaryExpr(
      [leaky_slope](double v) { return leaky(v, leaky_slope); });
  const Eigen::VectorXd logits = fc2.w * f + fc2.b;
  const Eigen::VectorXd dist = softmax(logits);

  if (cache != nullptr) {
    cache->q = q;
    cache->fc1_pre = fc1_pre;
    cache->f = f;
    cache->logits = logits;
  }
  return dist;
}

ClusteringOutput forward(const ModelParameters& params,
                         const Eigen::MatrixXd& raw, ForwardCache* cache) {
  const ModelConfig& cfg = params.config;
  if (raw.cols() < 2)
    throw std::invalid_argument("forward: sets need at least two elements");

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.hs.clear();
  c.trunk.clear();

  c.z = embed(cfg, raw);
  c.proj_pre = params.proj.w * c.z;
  c.proj_pre.colwise() += params.proj.b;
  c.u = c.proj_pre.unaryExpr(
      [&cfg](double v) { return leaky(v, cfg.leaky_slope); });

  Eigen::MatrixXd trunk_in;
  if (params.metric.has_value()) {
    c.metric.emplace();
    const Eigen::MatrixXd v = metric_block_forward(*params.metric, c.u,
                                                   cfg.leaky_slope, &*c.metric);
    if (cfg.metric_concat) {
      trunk_in.resize(c.u.rows() + v.rows(), c.u.cols());
      trunk_in.topRows(c.u.rows()) = c.u;
      trunk_in.bottomRows(v.rows()) = v;
    } else {
      trunk_in = v;
    }
  } else {
    trunk_in = c.u;
  }

  c.hs.push_back(std::move(trunk_in));
  c.trunk.resize(params.trunk.size());
  for (std::size_t l = 0; l < params.trunk.size(); ++l)
    c.hs.push_back(rbdlstm_forward(params.trunk[l], c.hs[l], &c.trunk[l]));
  const Eigen::MatrixXd& features = c.hs.back();

  ClusteringOutput out;
  out.k_max = cfg.k_max;
  out.n = static_cast<int>(raw.cols());
  out.assign =
      assignment_head(params.assign, features, cfg.k_max, &c.assign_logits);
  out.count_dist = count_head(params.count_rnn, params.count_fc1,
                              params.count_fc2, features, cfg.leaky_slope,
                              &c.count);
  c.out = out;
  return out;
}

void backward(const ModelParameters& params, const ForwardCache& cache,
              const OutputGrad& ograd, ModelParameters& grads) {
  const ModelConfig& cfg = params.config;
  const Eigen::MatrixXd& features = cache.hs.back();
  const Eigen::Index n = features.cols();

  // Assignment head: softmax backward per group, then the linear map.
  Eigen::MatrixXd dlogits(cache.out.assign.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 1; k <= cfg.k_max; ++k) {
      const int off = ClusteringOutput::group_offset(k);
      const auto p = cache.out.assign.col(i).segment(off, k);
      const auto dp = ograd.d_assign.col(i).segment(off, k);
      const double inner = dp.dot(p);
      dlogits.col(i).segment(off, k) =
          p.cwiseProduct(dp - Eigen::VectorXd::Constant(k, inner));
    }
  }
  grads.assign.w += dlogits * features.transpose();
  grads.assign.b += dlogits.rowwise().sum();
  Eigen::MatrixXd dfeat = params.assign.w.transpose() * dlogits;

  // Count head.
  {
    const Eigen::VectorXd& p = cache.out.count_dist;
    const double inner = ograd.d_count.dot(p);
    const Eigen::VectorXd dz = p.cwiseProduct(
        ograd.d_count - Eigen::VectorXd::Constant(p.size(), inner));
    grads.count_fc2.w += dz * cache.count.f.transpose();
    grads.count_fc2.b += dz;
    const Eigen::VectorXd df = params.count_fc2.w.transpose() * dz;
    const Eigen::VectorXd dfc1_pre =
        df.binaryExpr(cache.count.fc1_pre, [&cfg](double g, double pre) {
          return g * leaky_grad(pre, cfg.leaky_slope);
        });
    grads.count_fc1.w += dfc1_pre * cache.count.q.transpose();
    grads.count_fc1.b += dfc1_pre;
    const Eigen::VectorXd dq = params.count_fc1.w.transpose() * dfc1_pre;

    const Eigen::Index c2 = cache.count.q.size() / 2;
    Eigen::MatrixXd dg = Eigen::MatrixXd::Zero(c2, n);
    dg.col(0) += dq.head(c2);
    dg.col(n - 1) += dq.tail(c2);
    dfeat += bdlstm_backward(params.count_rnn, cache.count.rnn, dg,
                             grads.count_rnn);
  }

  // Trunk: residual layers pass the incoming gradient through unchanged and
  // add the BDLSTM branch's contribution.
  Eigen::MatrixXd g = std::move(dfeat);
  for (std::size_t l = params.trunk.size(); l-- > 0;)
    g += bdlstm_backward(params.trunk[l], cache.trunk[l], g, grads.trunk[l]);

  // Metric block and projection.
  Eigen::MatrixXd du;
  if (params.metric.has_value()) {
    Eigen::MatrixXd dz_metric;
    if (cfg.metric_concat) {
      const Eigen::Index pw = cache.u.rows();
      du = g.topRows(pw);
      metric_block_backward(*params.metric, *cache.metric, g.bottomRows(pw),
                            cfg.leaky_slope, *grads.metric, dz_metric);
    } else {
      du = Eigen::MatrixXd::Zero(cache.u.rows(), cache.u.cols());
      metric_block_backward(*params.metric, *cache.metric, g, cfg.leaky_slope,
                            *grads.metric, dz_metric);
    }
    du += dz_metric;
  } else {
    du = std::move(g);
  }

  const Eigen::MatrixXd dproj_pre =
      du.binaryExpr(cache.proj_pre, [&cfg](double gv, double pre) {
        return gv * leaky_grad(pre, cfg.leaky_slope);
      });
  grads.proj.w += dproj_pre * cache.z.transpose();
  grads.proj.b += dproj_pre.rowwise().sum();
}

}  // namespace clusternet
