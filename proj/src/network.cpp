#include "assortgen/network.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "assortgen/error.hpp"
#include "assortgen/rewire.hpp"

namespace assortgen {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CVec = Eigen::Map<const Vec>;
using MVec = Eigen::Map<Vec>;
using CRow = Eigen::Map<const RowVec>;
using MRow = Eigen::Map<RowVec>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

template <typename M>
auto silu_of(const M& m) {
  return m.unaryExpr([](double v) { return silu(v); });
}
template <typename M>
auto silu_grad_of(const M& m) {
  return m.unaryExpr([](double v) { return silu_grad(v); });
}

// Views of one parameter buffer (parameters or gradient).
struct View {
  const double* base;
  std::size_t h;
  CMap m(std::size_t off, std::size_t r, std::size_t c) const { return CMap(base + off, r, c); }
  CRow row(std::size_t off, std::size_t n) const { return CRow(base + off, n); }
  CVec col(std::size_t off, std::size_t n) const { return CVec(base + off, n); }
  double s(std::size_t off) const { return base[off]; }
};
struct GView {
  double* base;
  std::size_t h;
  MMap m(std::size_t off, std::size_t r, std::size_t c) const { return MMap(base + off, r, c); }
  MRow row(std::size_t off, std::size_t n) const { return MRow(base + off, n); }
  MVec col(std::size_t off, std::size_t n) const { return MVec(base + off, n); }
  double& s(std::size_t off) const { return base[off]; }
};

View view_of(const PolicyParams& p) { return View{p.data().data(), static_cast<std::size_t>(p.arch().hidden)}; }

GView grad_view(const PolicyParams& p, ParamGrad& grad) {
  if (grad.size() != p.size()) grad.assign(p.size(), 0.0);
  return GView{grad.data(), static_cast<std::size_t>(p.arch().hidden)};
}

RowVec pair_rep(const Mat& h, Node a, Node b) {
  const auto n = h.cols();
  RowVec r(2 * n);
  r.head(n) = h.row(a) + h.row(b);
  r.tail(n) = h.row(a).cwiseProduct(h.row(b));
  return r;
}

// Pushes the gradient of a pair representation back to its endpoints.
void pair_rep_backward(const Mat& h, Node a, Node b, const RowVec& d, Mat& dh) {
  const auto n = h.cols();
  dh.row(a) += d.head(n) + d.tail(n).cwiseProduct(h.row(b));
  dh.row(b) += d.head(n) + d.tail(n).cwiseProduct(h.row(a));
}

void check_shape(const PolicyParams& p) {
  if (p.size() != p.layout().total || p.arch().hidden < 1 || p.arch().layers < 0) {
    throw Error(ErrorKind::ShapeMismatch, "parameter buffer does not match architecture");
  }
}

}  // namespace

Layout Layout::build(const Architecture& arch) {
  if (arch.hidden < 1 || arch.layers < 0) throw Error(ErrorKind::ShapeMismatch, "invalid architecture");
  const auto h = static_cast<std::size_t>(arch.hidden);
  Layout lay;
  auto add = [&lay](std::string name, std::size_t r, std::size_t c) {
    lay.slots.push_back(ParamSlot{std::move(name), r, c, lay.total});
    lay.total += r * c;
    return lay.slots.back().offset;
  };
  lay.embed_w = add("embed.w", 1, h);
  lay.embed_b = add("embed.b", 1, h);
  for (int l = 0; l < arch.layers; ++l) {
    const std::string g = "gin" + std::to_string(l) + ".";
    const std::string f = "film" + std::to_string(l) + ".";
    Layer ly{};
    ly.eps = add(g + "eps", 1, 1);
    ly.w1 = add(g + "w1", h, h);
    ly.b1 = add(g + "b1", 1, h);
    ly.w2 = add(g + "w2", h, h);
    ly.b2 = add(g + "b2", 1, h);
    ly.gamma_w = add(f + "gamma_w", 1, h);
    ly.gamma_b = add(f + "gamma_b", 1, h);
    ly.beta_w = add(f + "beta_w", 1, h);
    ly.beta_b = add(f + "beta_b", 1, h);
    lay.gin.push_back(ly);
  }
  auto head = [&](const std::string& name, bool with_ctx) {
    Head hd{};
    hd.w_in = add(name + ".w_in", 2 * h, h);
    hd.w_ctx = with_ctx ? add(name + ".w_ctx", 2 * h, h) : kNone;
    hd.b_in = add(name + ".b_in", 1, h);
    hd.w_out = add(name + ".w_out", h, 1);
    hd.b_out = add(name + ".b_out", 1, 1);
    return hd;
  };
  lay.head1 = head("head1", false);
  lay.head2 = head("head2", true);
  lay.head_mode = head("head_mode", true);
  lay.value.w_pool = add("value.w_pool", h, h);
  lay.value.w_gap = add("value.w_gap", 2, h);
  lay.value.b_in = add("value.b_in", 1, h);
  lay.value.w_out = add("value.w_out", h, 1);
  lay.value.b_out = add("value.b_out", 1, 1);
  return lay;
}

PolicyParams::PolicyParams(const Architecture& arch)
    : arch_(arch), layout_(Layout::build(arch)), data_(layout_.total, 0.0) {}

PolicyParams PolicyParams::initialize(const Architecture& arch, Seed seed) {
  PolicyParams p(arch);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](std::size_t off, std::size_t n, double sd) {
    for (std::size_t i = 0; i < n; ++i) p.data_[off + i] = sd * normal(rng);
  };
  const auto h = static_cast<std::size_t>(arch.hidden);
  const double inv_h = 1.0 / std::sqrt(static_cast<double>(h));
  const double inv_2h = 1.0 / std::sqrt(2.0 * static_cast<double>(h));
  const Layout& lay = p.layout_;
  fill(lay.embed_w, h, 1.0);
  fill(lay.embed_b, h, 0.1);
  for (const auto& ly : lay.gin) {
    fill(ly.w1, h * h, inv_h);
    fill(ly.w2, h * h, inv_h);
    fill(ly.gamma_w, h, 0.1);
    fill(ly.beta_w, h, 0.1);
    for (std::size_t i = 0; i < h; ++i) p.data_[ly.gamma_b + i] = 1.0;
  }
  for (const Layout::Head* hd : {&lay.head1, &lay.head2, &lay.head_mode}) {
    fill(hd->w_in, 2 * h * h, inv_2h);
    if (hd->w_ctx != kNone) fill(hd->w_ctx, 2 * h * h, inv_2h);
    // w_out stays zero: the initial policy is uniform over admissible actions
  }
  fill(lay.value.w_pool, h * h, inv_h);
  fill(lay.value.w_gap, 2 * h, 0.5);
  fill(lay.value.w_out, h, 0.01);
  return p;
}

void PolicyParams::validate() const {
  if (data_.size() != Layout::build(arch_).total) throw Error(ErrorKind::ShapeMismatch, "parameter count mismatch");
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "non-finite parameter");
  }
}

std::vector<double> node_features(const GraphView& g) {
  std::vector<double> x(g.num_nodes, 0.0);
  if (g.max_degree > 0) {
    for (std::size_t i = 0; i < g.num_nodes; ++i) x[i] = static_cast<double>(g.degrees[i]) / g.max_degree;
  }
  return x;
}

void encoder_forward(const PolicyParams& p, const GraphView& g, double condition, EncoderCache& c) {
  check_shape(p);
  const View P = view_of(p);
  const std::size_t h = P.h;
  const std::size_t n = g.num_nodes;
  const Layout& lay = p.layout();
  const std::vector<double> feats = node_features(g);
  c.condition = condition;
  c.x = CVec(feats.data(), static_cast<Eigen::Index>(n));
  const std::size_t layers = lay.gin.size();
  c.h.assign(layers + 1, Mat());
  c.agg.assign(layers, Mat());
  c.pre1.assign(layers, Mat());
  c.act1.assign(layers, Mat());
  c.msg.assign(layers, Mat());
  c.film.assign(layers, Mat());

  c.h[0] = c.x * P.row(lay.embed_w, h);
  c.h[0].rowwise() += P.row(lay.embed_b, h);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& ly = lay.gin[l];
    const Mat& hl = c.h[l];
    Mat& agg = c.agg[l];
    agg = (1.0 + P.s(ly.eps)) * hl;
    for (const Edge& e : g.edges) {
      agg.row(e.u) += hl.row(e.v);
      agg.row(e.v) += hl.row(e.u);
    }
    c.pre1[l] = agg * P.m(ly.w1, h, h);
    c.pre1[l].rowwise() += P.row(ly.b1, h);
    c.act1[l] = silu_of(c.pre1[l]);
    c.msg[l] = c.act1[l] * P.m(ly.w2, h, h);
    c.msg[l].rowwise() += P.row(ly.b2, h);
    const RowVec gamma = P.row(ly.gamma_b, h) + condition * P.row(ly.gamma_w, h);
    const RowVec beta = P.row(ly.beta_b, h) + condition * P.row(ly.beta_w, h);
    c.film[l] = c.msg[l].array().rowwise() * gamma.array();
    c.film[l].rowwise() += beta;
    c.h[l + 1] = hl + Mat(silu_of(c.film[l]));
  }
}

void encoder_backward(const PolicyParams& p, const GraphView& g, const EncoderCache& c, const Mat& d_out,
                      ParamGrad& grad) {
  const View P = view_of(p);
  const GView G = grad_view(p, grad);
  const std::size_t h = P.h;
  const Layout& lay = p.layout();
  const double cond = c.condition;
  Mat dh = d_out;
  for (std::size_t l = lay.gin.size(); l-- > 0;) {
    const auto& ly = lay.gin[l];
    const Mat dfilm = dh.cwiseProduct(Mat(silu_grad_of(c.film[l])));
    const RowVec gamma = P.row(ly.gamma_b, h) + cond * P.row(ly.gamma_w, h);
    const RowVec dgamma = dfilm.cwiseProduct(c.msg[l]).colwise().sum();
    const RowVec dbeta = dfilm.colwise().sum();
    G.row(ly.gamma_b, h) += dgamma;
    G.row(ly.gamma_w, h) += cond * dgamma;
    G.row(ly.beta_b, h) += dbeta;
    G.row(ly.beta_w, h) += cond * dbeta;
    const Mat dmsg = dfilm.array().rowwise() * gamma.array();
    G.m(ly.w2, h, h).noalias() += c.act1[l].transpose() * dmsg;
    G.row(ly.b2, h) += dmsg.colwise().sum();
    const Mat dpre1 = (dmsg * P.m(ly.w2, h, h).transpose()).cwiseProduct(Mat(silu_grad_of(c.pre1[l])));
    G.m(ly.w1, h, h).noalias() += c.agg[l].transpose() * dpre1;
    G.row(ly.b1, h) += dpre1.colwise().sum();
    const Mat dagg = dpre1 * P.m(ly.w1, h, h).transpose();
    G.s(ly.eps) += dagg.cwiseProduct(c.h[l]).sum();
    Mat dprev = dh + (1.0 + P.s(ly.eps)) * dagg;
    for (const Edge& e : g.edges) {
      dprev.row(e.u) += dagg.row(e.v);
      dprev.row(e.v) += dagg.row(e.u);
    }
    dh = std::move(dprev);
  }
  G.row(lay.embed_w, h) += c.x.transpose() * dh;
  G.row(lay.embed_b, h) += dh.colwise().sum();
}

PolicyEval::PolicyEval(const PolicyParams& p, const GraphView& g, int sign) : p_(p), g_(g) {
  const std::size_t m = g.edges.size();
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "policy needs at least two edges");
  encoder_forward(p, g, sign >= 0 ? 1.0 : -1.0, enc_);
  const View P = view_of(p);
  const std::size_t h = P.h;
  const Layout& lay = p.layout();
  const Mat& hn = enc_.out();
  z_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * h));
  for (std::size_t e = 0; e < m; ++e) z_.row(e) = pair_rep(hn, g.edges[e].u, g.edges[e].v);

  pre1_ = z_ * P.m(lay.head1.w_in, 2 * h, h);
  pre1_.rowwise() += P.row(lay.head1.b_in, h);
  s1_ = Mat(silu_of(pre1_)) * P.col(lay.head1.w_out, h);
  s1_.array() += P.s(lay.head1.b_out);
  zin2_ = z_ * P.m(lay.head2.w_in, 2 * h, h);
}

const Vec& PolicyEval::scores2(std::size_t e1) {
  if (e1 >= g_.edges.size()) throw Error(ErrorKind::InvalidArgument, "e1 out of range");
  if (e1 == e1_) return s2_;
  const View P = view_of(p_);
  const std::size_t h = P.h;
  const auto& hd = p_.layout().head2;
  const RowVec ctx = z_.row(e1) * P.m(hd.w_ctx, 2 * h, h) + P.row(hd.b_in, h);
  pre2_ = zin2_;
  pre2_.rowwise() += ctx;
  s2_ = Mat(silu_of(pre2_)) * P.col(hd.w_out, h);
  s2_.array() += P.s(hd.b_out);
  e1_ = e1;
  e2_ = kNone;
  return s2_;
}

const Eigen::Vector2d& PolicyEval::scores_mode(std::size_t e1, std::size_t e2) {
  if (e2 >= g_.edges.size() || e2 == e1) throw Error(ErrorKind::InvalidArgument, "e2 out of range");
  scores2(e1);
  if (e2 == e2_) return s_mode_;
  const View P = view_of(p_);
  const std::size_t h = P.h;
  const auto& hd = p_.layout().head_mode;
  const Mat& hn = enc_.out();
  ctx_mode_ = z_.row(e1) + z_.row(e2);
  const RowVec cpart = ctx_mode_ * P.m(hd.w_ctx, 2 * h, h) + P.row(hd.b_in, h);
  y_mode_.resize(2, static_cast<Eigen::Index>(2 * h));
  for (int b = 0; b < 2; ++b) {
    const auto [n1, n2] = pair_for_mode(g_.edges[e1], g_.edges[e2], b);
    y_mode_.row(b) = pair_rep(hn, n1.u, n1.v) + pair_rep(hn, n2.u, n2.v);
  }
  pre_mode_ = y_mode_ * P.m(hd.w_in, 2 * h, h);
  pre_mode_.rowwise() += cpart;
  s_mode_ = Mat(silu_of(pre_mode_)) * P.col(hd.w_out, h);
  s_mode_.array() += P.s(hd.b_out);
  e2_ = e2;
  return s_mode_;
}

void PolicyEval::backward(std::span<const double> d_s1, std::span<const double> d_s2,
                          std::span<const double> d_mode, ParamGrad& grad) const {
  const View P = view_of(p_);
  const GView G = grad_view(p_, grad);
  const std::size_t h = P.h;
  const std::size_t m = g_.edges.size();
  const Layout& lay = p_.layout();
  const Mat& hn = enc_.out();
  Mat dz = Mat::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * h));
  Mat dh = Mat::Zero(hn.rows(), hn.cols());

  if (!d_s1.empty()) {
    if (d_s1.size() != m) throw Error(ErrorKind::ShapeMismatch, "d_s1 length");
    const Vec ds = CVec(d_s1.data(), static_cast<Eigen::Index>(m));
    const auto& hd = lay.head1;
    const Mat act = silu_of(pre1_);
    G.col(hd.w_out, h).noalias() += act.transpose() * ds;
    G.s(hd.b_out) += ds.sum();
    const Mat dpre = (ds * P.col(hd.w_out, h).transpose()).cwiseProduct(Mat(silu_grad_of(pre1_)));
    G.m(hd.w_in, 2 * h, h).noalias() += z_.transpose() * dpre;
    G.row(hd.b_in, h) += dpre.colwise().sum();
    dz.noalias() += dpre * P.m(hd.w_in, 2 * h, h).transpose();
  }
  if (!d_s2.empty()) {
    if (d_s2.size() != m || e1_ == kNone) throw Error(ErrorKind::ShapeMismatch, "d_s2 without head-2 evaluation");
    const Vec ds = CVec(d_s2.data(), static_cast<Eigen::Index>(m));
    const auto& hd = lay.head2;
    const Mat act = silu_of(pre2_);
    G.col(hd.w_out, h).noalias() += act.transpose() * ds;
    G.s(hd.b_out) += ds.sum();
    const Mat dpre = (ds * P.col(hd.w_out, h).transpose()).cwiseProduct(Mat(silu_grad_of(pre2_)));
    G.m(hd.w_in, 2 * h, h).noalias() += z_.transpose() * dpre;
    dz.noalias() += dpre * P.m(hd.w_in, 2 * h, h).transpose();
    const RowVec dctx = dpre.colwise().sum();
    G.row(hd.b_in, h) += dctx;
    G.m(hd.w_ctx, 2 * h, h).noalias() += z_.row(e1_).transpose() * dctx;
    dz.row(e1_) += dctx * P.m(hd.w_ctx, 2 * h, h).transpose();
  }
  if (!d_mode.empty()) {
    if (d_mode.size() != 2 || e2_ == kNone) throw Error(ErrorKind::ShapeMismatch, "d_mode without mode evaluation");
    const auto& hd = lay.head_mode;
    RowVec dctx = RowVec::Zero(static_cast<Eigen::Index>(h));
    for (int b = 0; b < 2; ++b) {
      const double db = d_mode[b];
      const RowVec pre = pre_mode_.row(b);
      G.col(hd.w_out, h) += db * Vec(silu_of(pre).transpose());
      G.s(hd.b_out) += db;
      const RowVec dpre = (db * P.col(hd.w_out, h).transpose()).cwiseProduct(RowVec(silu_grad_of(pre)));
      G.m(hd.w_in, 2 * h, h).noalias() += y_mode_.row(b).transpose() * dpre;
      dctx += dpre;
      const RowVec dy = dpre * P.m(hd.w_in, 2 * h, h).transpose();
      const auto [n1, n2] = pair_for_mode(g_.edges[e1_], g_.edges[e2_], b);
      pair_rep_backward(hn, n1.u, n1.v, dy, dh);
      pair_rep_backward(hn, n2.u, n2.v, dy, dh);
    }
    G.row(hd.b_in, h) += dctx;
    G.m(hd.w_ctx, 2 * h, h).noalias() += ctx_mode_.transpose() * dctx;
    const RowVec dc = dctx * P.m(hd.w_ctx, 2 * h, h).transpose();
    dz.row(e1_) += dc;
    dz.row(e2_) += dc;
  }
  for (std::size_t e = 0; e < m; ++e) {
    pair_rep_backward(hn, g_.edges[e].u, g_.edges[e].v, dz.row(e), dh);
  }
  encoder_backward(p_, g_, enc_, dh, grad);
}

ValueEval::ValueEval(const PolicyParams& p, const GraphView& g, double gap) : p_(p), g_(g) {
  if (g.num_nodes == 0) throw Error(ErrorKind::InvalidArgument, "value of an empty graph");
  const double gs = p.arch().gap_scale;
  encoder_forward(p, g, gs * gap, enc_);
  const View P = view_of(p);
  const std::size_t h = P.h;
  const auto& vl = p.layout().value;
  pooled_ = enc_.out().colwise().mean();
  gap_features_.resize(2);
  gap_features_ << gs * gap, gs * std::abs(gap);
  pre_ = pooled_ * P.m(vl.w_pool, h, h) + gap_features_ * P.m(vl.w_gap, 2, h) + RowVec(P.row(vl.b_in, h));
  v_ = p.arch().value_scale * (silu_of(pre_).dot(P.col(vl.w_out, h).transpose()) + P.s(vl.b_out));
}

void ValueEval::backward(double d_value, ParamGrad& grad) const {
  const View P = view_of(p_);
  const GView G = grad_view(p_, grad);
  const std::size_t h = P.h;
  const auto& vl = p_.layout().value;
  const double dv = d_value * p_.arch().value_scale;
  G.col(vl.w_out, h) += dv * Vec(silu_of(pre_).transpose());
  G.s(vl.b_out) += dv;
  const RowVec dpre = (dv * P.col(vl.w_out, h).transpose()).cwiseProduct(RowVec(silu_grad_of(pre_)));
  G.m(vl.w_pool, h, h).noalias() += pooled_.transpose() * dpre;
  G.m(vl.w_gap, 2, h).noalias() += gap_features_.transpose() * dpre;
  G.row(vl.b_in, h) += dpre;
  const RowVec dpooled = dpre * P.m(vl.w_pool, h, h).transpose();
  const auto n = enc_.out().rows();
  Mat dh = dpooled.replicate(n, 1) / static_cast<double>(n);
  encoder_backward(p_, g_, enc_, dh, grad);
}

}  // namespace assortgen
