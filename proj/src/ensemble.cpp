#include "mhxai/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "mhxai/error.hpp"

namespace mhxai::ensemble {

namespace {

constexpr double kMinSplitGain = 1e-10;
constexpr double kHessianFloor = 1e-16;
constexpr double kAbsentClassPrior = 1e-6;

}  // namespace

int Tree::leaf_index(const FeatureVector& x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return i;
}

int Tree::depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      deepest = std::max(deepest, d);
    } else {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

namespace {

double expected_value_at(const Tree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return n.value;
  const auto& l = t.nodes[static_cast<std::size_t>(n.left)];
  const auto& r = t.nodes[static_cast<std::size_t>(n.right)];
  return (l.cover * expected_value_at(t, n.left) + r.cover * expected_value_at(t, n.right)) /
         (l.cover + r.cover);
}

}  // namespace

double Tree::expected_value() const { return expected_value_at(*this, 0); }

Tree Tree::leaf(double value, double cover) {
  Tree t;
  t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, value, cover});
  return t;
}

void TrainConfig::validate() const {
  if (rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  if (max_depth < 0) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 0");
  if (!(learning_rate > 0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (!(l1_penalty >= 0) || !(l2_penalty >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "penalties must be >= 0");
  }
  if (!(min_child_weight >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_child_weight must be >= 0");
  }
  if (class_weights) {
    for (double w : *class_weights) {
      if (!(w > 0) || !std::isfinite(w)) {
        throw Error(ErrorCode::kInvalidArgument, "class weights must be positive");
      }
    }
  }
}

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "rounds=" << rounds << " max_depth=" << max_depth << " learning_rate=" << learning_rate
     << " l1_penalty=" << l1_penalty << " l2_penalty=" << l2_penalty
     << " min_child_weight=" << min_child_weight << " class_weights=";
  if (class_weights) {
    os << (*class_weights)[0] << ',' << (*class_weights)[1] << ',' << (*class_weights)[2];
  } else {
    os << "balanced";
  }
  os << " seed=" << seed;
  return os.str();
}

FeatureStats FeatureStats::of(const FeatureMatrix& x) {
  FeatureStats s;
  const auto n = static_cast<double>(x.rows());
  if (x.rows() == 0) return s;
  s.mean = x.colwise().mean().transpose();
  for (int j = 0; j < kNumFeatures; ++j) {
    const double ss = (x.col(j).array() - s.mean[j]).square().sum();
    s.stddev[j] = x.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return s;
}

void TreeEnsemble::validate() const {
  if (rounds.empty()) throw Error(ErrorCode::kCorruptFile, "ensemble has no trees");
  if (!(learning_rate > 0)) throw Error(ErrorCode::kCorruptFile, "learning_rate must be > 0");
  for (const auto& round : rounds) {
    for (const auto& tree : round) {
      if (tree.nodes.empty()) throw Error(ErrorCode::kCorruptFile, "empty tree");
      const int n = static_cast<int>(tree.nodes.size());
      for (int i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.is_leaf()) continue;
        // Children always follow their parent, which also rules out cycles.
        if (node.feature >= kNumFeatures || node.left <= i || node.right <= i ||
            node.left >= n || node.right >= n || !std::isfinite(node.threshold)) {
          throw Error(ErrorCode::kCorruptFile, "malformed tree node");
        }
      }
    }
  }
}

namespace {

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& x, const std::vector<std::vector<int>>& order,
             const TrainConfig& cfg)
      : x_(x), order_(order), cfg_(cfg), in_node_(static_cast<std::size_t>(x.rows()), 0) {}

  /// Grows one tree on (grad, hess) and writes each row's leaf value into `fitted`.
  Tree grow(const std::vector<double>& grad, const std::vector<double>& hess,
            const std::vector<double>& weight, std::vector<double>& fitted) {
    grad_ = &grad;
    hess_ = &hess;
    weight_ = &weight;
    fitted_ = &fitted;
    tree_ = Tree{};
    std::vector<int> rows(static_cast<std::size_t>(x_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    build(rows, 0);
    return std::move(tree_);
  }

 private:
  double leaf_score(double g, double h) const {
    const double t = soft_threshold(g, cfg_.l1_penalty);
    return t * t / (h + cfg_.l2_penalty);
  }

  int build(const std::vector<int>& rows, int depth) {
    double g = 0, h = 0, w = 0;
    for (int i : rows) {
      g += (*grad_)[i];
      h += (*hess_)[i];
      w += (*weight_)[i];
    }
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.back().cover = w;

    int best_feature = -1;
    double best_threshold = 0;
    double best_gain = kMinSplitGain;
    if (depth < cfg_.max_depth && rows.size() >= 2) {
      const double parent = leaf_score(g, h);
      for (int i : rows) in_node_[static_cast<std::size_t>(i)] = 1;
      std::vector<int> sorted;
      sorted.reserve(rows.size());
      for (int f = 0; f < kNumFeatures; ++f) {
        sorted.clear();
        for (int i : order_[static_cast<std::size_t>(f)]) {
          if (in_node_[static_cast<std::size_t>(i)]) sorted.push_back(i);
        }
        double gl = 0, hl = 0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
          gl += (*grad_)[sorted[k]];
          hl += (*hess_)[sorted[k]];
          const double lo = x_(sorted[k], f);
          const double hi = x_(sorted[k + 1], f);
          if (lo == hi) continue;
          const double hr = h - hl;
          if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) continue;
          const double gain = 0.5 * (leaf_score(gl, hl) + leaf_score(g - gl, hr) - parent);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            double thr = 0.5 * (lo + hi);
            if (!(thr > lo)) thr = hi;
            best_threshold = thr;
          }
        }
      }
      for (int i : rows) in_node_[static_cast<std::size_t>(i)] = 0;
    }

    if (best_feature < 0) {
      const double value = -soft_threshold(g, cfg_.l1_penalty) / (h + cfg_.l2_penalty);
      tree_.nodes[static_cast<std::size_t>(index)].value = value;
      for (int i : rows) (*fitted_)[static_cast<std::size_t>(i)] = value;
      return index;
    }

    std::vector<int> left, right;
    for (int i : rows) (x_(i, best_feature) < best_threshold ? left : right).push_back(i);
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const FeatureMatrix& x_;
  const std::vector<std::vector<int>>& order_;
  const TrainConfig& cfg_;
  std::vector<char> in_node_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  const std::vector<double>* weight_ = nullptr;
  std::vector<double>* fitted_ = nullptr;
  Tree tree_;
};

double weighted_log_loss(const Eigen::MatrixXd& margins, std::span<const int> labels,
                         const std::vector<double>& weight) {
  double loss = 0, total = 0;
  for (Eigen::Index i = 0; i < margins.rows(); ++i) {
    const ClassVector m = margins.row(i).transpose();
    const double mx = m.maxCoeff();
    const double lse = mx + std::log((m.array() - mx).exp().sum());
    loss += weight[static_cast<std::size_t>(i)] * (lse - m[labels[static_cast<std::size_t>(i)]]);
    total += weight[static_cast<std::size_t>(i)];
  }
  return loss / total;
}

}  // namespace

TreeEnsemble train(const FeatureMatrix& x, std::span<const int> labels, const TrainConfig& cfg,
                   TrainingReport* report) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (labels.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "feature rows and labels differ in length");
  }
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteFeature, "non-finite feature value");
  std::array<std::size_t, kNumClasses> counts{};
  for (int y : labels) {
    if (y < 0 || y >= kNumClasses) throw Error(ErrorCode::kInvalidArgument, "label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  if (present < 2) {
    throw Error(ErrorCode::kDegenerateLabels, "training labels contain fewer than 2 classes");
  }

  std::array<double, kNumClasses> class_weight{};
  for (int c = 0; c < kNumClasses; ++c) {
    if (cfg.class_weights) {
      class_weight[c] = (*cfg.class_weights)[c];
    } else if (counts[c] > 0) {
      class_weight[c] = static_cast<double>(n) / (static_cast<double>(present) * counts[c]);
    }
  }
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = class_weight[labels[i]];

  TreeEnsemble model;
  model.learning_rate = cfg.learning_rate;
  model.config = cfg.describe();
  model.feature_stats = FeatureStats::of(x);
  {
    double total = 0;
    ClassVector mass = ClassVector::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      mass[labels[i]] += weight[i];
      total += weight[i];
    }
    for (int c = 0; c < kNumClasses; ++c) {
      model.base_score[c] = std::log(std::max(mass[c] / total, kAbsentClassPrior));
    }
  }

  std::vector<std::vector<int>> order(kNumFeatures, std::vector<int>(n));
  for (int f = 0; f < kNumFeatures; ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
  }

  Eigen::MatrixXd margins(static_cast<Eigen::Index>(n), kNumClasses);
  for (std::size_t i = 0; i < n; ++i) margins.row(static_cast<Eigen::Index>(i)) = model.base_score.transpose();

  if (report) {
    report->loss.clear();
    report->class_weights = class_weight;
    report->loss.push_back(weighted_log_loss(margins, labels, weight));
  }

  TreeGrower grower(x, order, cfg);
  std::vector<std::vector<double>> grad(kNumClasses, std::vector<double>(n));
  std::vector<std::vector<double>> hess(kNumClasses, std::vector<double>(n));
  std::vector<double> fitted(n);
  model.rounds.reserve(static_cast<std::size_t>(cfg.rounds));
  for (int r = 0; r < cfg.rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const ClassVector p = softmax(margins.row(static_cast<Eigen::Index>(i)).transpose());
      for (int c = 0; c < kNumClasses; ++c) {
        const double target = labels[i] == c ? 1.0 : 0.0;
        grad[c][i] = weight[i] * (p[c] - target);
        hess[c][i] = weight[i] * std::max(p[c] * (1.0 - p[c]), kHessianFloor);
      }
    }
    std::array<Tree, kNumClasses> round;
    for (int c = 0; c < kNumClasses; ++c) {
      round[c] = grower.grow(grad[c], hess[c], weight, fitted);
      for (std::size_t i = 0; i < n; ++i) {
        margins(static_cast<Eigen::Index>(i), c) += cfg.learning_rate * fitted[i];
      }
    }
    model.rounds.push_back(std::move(round));
    if (report) report->loss.push_back(weighted_log_loss(margins, labels, weight));
  }
  return model;
}

ClassVector predict_margin(const TreeEnsemble& m, const FeatureVector& x) {
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteFeature, "non-finite feature value");
  ClassVector sum = ClassVector::Zero();
  for (const auto& round : m.rounds) {
    for (int c = 0; c < kNumClasses; ++c) sum[c] += round[c].predict(x);
  }
  return m.base_score + m.learning_rate * sum;
}

ClassVector predict_margin(const TreeEnsemble& m, const Eigen::VectorXd& x) {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::kBadVectorLength,
                "expected " + std::to_string(kNumFeatures) + " features, got " +
                    std::to_string(x.size()));
  }
  return predict_margin(m, FeatureVector(x));
}

ClassVector softmax(const ClassVector& margins) {
  const ClassVector e = (margins.array() - margins.maxCoeff()).exp();
  return e / e.sum();
}

ClassVector predict_proba(const TreeEnsemble& m, const FeatureVector& x) {
  return softmax(predict_margin(m, x));
}

int argmax_high(const ClassVector& v) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (v[c] >= v[best]) best = c;
  }
  return best;
}

data::RiskLevel predict(const TreeEnsemble& m, const FeatureVector& x) {
  return static_cast<data::RiskLevel>(argmax_high(predict_margin(m, x)));
}

std::optional<double> auc(std::span<const double> scores, std::span<const bool> positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) {
      pos += 1;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

Metrics evaluate_probabilities(const Eigen::MatrixXd& proba, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(proba.rows());
  if (n == 0) throw Error(ErrorCode::kEmptyTestSet, "test set is empty");
  if (labels.size() != n || proba.cols() != kNumClasses) {
    throw Error(ErrorCode::kInvalidArgument, "probability table does not match labels");
  }
  Metrics m;
  m.n = n;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int pred = argmax_high(proba.row(static_cast<Eigen::Index>(i)).transpose());
    ++m.confusion(labels[i], pred);
    if (pred == labels[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  double auc_sum = 0;
  int auc_count = 0;
  std::vector<double> scores(n);
  // std::vector<bool> is not contiguous, so the flags live in a plain array.
  auto positive = std::make_unique<bool[]>(n);
  for (int c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = proba(static_cast<Eigen::Index>(i), c);
      positive[i] = labels[i] == c;
    }
    m.class_auc[c] = auc(scores, std::span<const bool>(positive.get(), n));
    if (m.class_auc[c]) {
      auc_sum += *m.class_auc[c];
      ++auc_count;
    }
    const double predicted = static_cast<double>(m.confusion.col(c).sum());
    const double actual = static_cast<double>(m.confusion.row(c).sum());
    m.precision[c] = predicted > 0 ? m.confusion(c, c) / predicted : 0.0;
    m.recall[c] = actual > 0 ? m.confusion(c, c) / actual : 0.0;
  }
  m.roc_auc = auc_count > 0 ? auc_sum / auc_count : std::nan("");
  return m;
}

Metrics evaluate(const TreeEnsemble& m, const FeatureMatrix& x, std::span<const int> labels) {
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyTestSet, "test set is empty");
  Eigen::MatrixXd proba(x.rows(), kNumClasses);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    proba.row(i) = predict_proba(m, x.row(i).transpose()).transpose();
  }
  return evaluate_probabilities(proba, labels);
}

}  // namespace mhxai::ensemble
