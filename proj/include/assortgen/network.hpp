#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assortgen/graph.hpp"
#include "assortgen/rng.hpp"

namespace assortgen {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;
using Vec = Eigen::VectorXd;

// Fixed alignment keeps vectorized reductions over mapped slots reproducible.
using FlatVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Network shape. Recorded in checkpoints.
struct Architecture {
  int layers{3};
  int hidden{64};
  double gap_scale{10.0};     // conditioning inputs are gap * gap_scale
  double value_scale{100.0};  // value head output multiplier

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Named, shaped parameter array inside a flat buffer.
struct ParamSlot {
  std::string name;
  std::size_t rows{0};
  std::size_t cols{0};
  std::size_t offset{0};
  std::size_t size() const { return rows * cols; }
};

/// Offsets of every parameter block. Matrices are (fan_in x fan_out),
/// row-major; activations are row vectors.
struct Layout {
  struct Layer {
    std::size_t eps, w1, b1, w2, b2, gamma_w, gamma_b, beta_w, beta_b;
  };
  struct Head {
    std::size_t w_in, w_ctx, b_in, w_out, b_out;  // w_ctx unused by head 1
  };
  struct Value {
    std::size_t w_pool, w_gap, b_in, w_out, b_out;
  };

  std::size_t embed_w{0}, embed_b{0};
  std::vector<Layer> gin;
  Head head1{}, head2{}, head_mode{};
  Value value{};
  std::vector<ParamSlot> slots;
  std::size_t total{0};

  static Layout build(const Architecture& arch);
};

/// Parameters of the message-passing encoder, three policy heads and value
/// head, stored flat for the optimizer and serialization.
class PolicyParams {
public:
  PolicyParams() = default;
  explicit PolicyParams(const Architecture& arch);

  /// Random initialization; output layers start near zero so the initial
  /// policy is close to uniform over unmasked actions.
  static PolicyParams initialize(const Architecture& arch, Seed seed);

  const Architecture& arch() const noexcept { return arch_; }
  const Layout& layout() const noexcept { return layout_; }
  FlatVector& data() noexcept { return data_; }
  const FlatVector& data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Throws ShapeMismatch / NonFinite.
  void validate() const;

private:
  Architecture arch_{};
  Layout layout_{};
  FlatVector data_;
};

/// Gradient buffer with the same layout as PolicyParams.
using ParamGrad = FlatVector;

/// Lightweight graph description consumed by the network; the edge order is
/// the slot order actions refer to.
struct GraphView {
  std::size_t num_nodes{0};
  std::span<const Edge> edges;
  std::span<const int> degrees;
  int max_degree{0};

  static GraphView of(const Graph& g) {
    return GraphView{g.num_nodes(), std::span<const Edge>(g.edges()), std::span<const int>(g.degrees()), g.max_degree()};
  }
};

/// k_i / k_max per node (all zero for an edgeless graph).
std::vector<double> node_features(const GraphView& g);
inline std::vector<double> node_features(const Graph& g) { return node_features(GraphView::of(g)); }

/// Forward activations of the encoder kept for the backward pass.
struct EncoderCache {
  double condition{0.0};
  Vec x;                  // node features
  std::vector<Mat> h;     // L + 1 embeddings
  std::vector<Mat> agg;   // aggregated inputs per layer
  std::vector<Mat> pre1;  // first linear of the update map
  std::vector<Mat> act1;
  std::vector<Mat> msg;   // update-map output before modulation
  std::vector<Mat> film;  // modulated output before activation
  const Mat& out() const { return h.back(); }
};

/// L rounds of sum aggregation with learnable self weight, a two-layer
/// update map, feature-wise affine modulation from `condition`, and a
/// residual connection.
void encoder_forward(const PolicyParams& p, const GraphView& g, double condition, EncoderCache& cache);
void encoder_backward(const PolicyParams& p, const GraphView& g, const EncoderCache& cache, const Mat& d_out,
                      ParamGrad& grad);

inline Mat encode(const PolicyParams& p, const Graph& g, double condition) {
  EncoderCache c;
  encoder_forward(p, GraphView::of(g), condition, c);
  return c.out();
}

/// Policy-head evaluation for one state. Head 2 and the mode head are
/// evaluated lazily once e1 (and e2) are known.
class PolicyEval {
public:
  /// sign is sgn(rho* - rho) in {-1, +1}. Throws InvalidArgument if E < 2.
  PolicyEval(const PolicyParams& p, const GraphView& g, int sign);

  const Vec& scores1() const { return s1_; }
  const Vec& scores2(std::size_t e1);
  const Eigen::Vector2d& scores_mode(std::size_t e1, std::size_t e2);

  /// Accumulates parameter gradients given dL/d(scores). Uses the e1/e2 of
  /// the last scores2 / scores_mode calls; empty spans skip a head.
  void backward(std::span<const double> d_s1, std::span<const double> d_s2, std::span<const double> d_mode,
                ParamGrad& grad) const;

  const GraphView& graph() const { return g_; }
  std::size_t e1() const { return e1_; }
  std::size_t e2() const { return e2_; }

private:
  const PolicyParams& p_;
  GraphView g_;
  EncoderCache enc_;
  Mat z_;      // edge representations E x 2H
  Mat pre1_;   // head 1 hidden pre-activations
  Vec s1_;
  Mat zin2_;   // z * W_in of head 2, independent of e1
  std::size_t e1_{static_cast<std::size_t>(-1)};
  Mat pre2_;
  Vec s2_;
  std::size_t e2_{static_cast<std::size_t>(-1)};
  Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor> y_mode_;    // pair representations
  Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor> pre_mode_;
  RowVec ctx_mode_;
  Eigen::Vector2d s_mode_;
};

/// Value estimate conditioned on the full gap rho* - rho.
class ValueEval {
public:
  ValueEval(const PolicyParams& p, const GraphView& g, double gap);
  double value() const { return v_; }
  void backward(double d_value, ParamGrad& grad) const;

private:
  const PolicyParams& p_;
  GraphView g_;
  EncoderCache enc_;
  RowVec pooled_;
  RowVec gap_features_;
  RowVec pre_;
  double v_{0.0};
};

inline double value_forward(const PolicyParams& p, const Graph& g, double gap) {
  return ValueEval(p, GraphView::of(g), gap).value();
}

}  // namespace assortgen
