#include "mhxai/shap.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "mhxai/error.hpp"

namespace mhxai::shap {

namespace {

// Path-dependent TreeSHAP (polynomial-time exact algorithm). Each path
// element tracks the fraction of "feature missing" (zero) and "feature
// present" (one) flow through the splits on that feature, plus the
// permutation weight of subsets of a given size.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0;
  double one_fraction = 0;
  double weight = 0;
};

using Path = std::vector<PathElement>;

void extend(Path& path, int depth, double zero, double one, int feature) {
  path[depth] = PathElement{feature, zero, one, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one * path[i].weight * (i + 1) / (depth + 1.0);
    path[i].weight = zero * path[i].weight * (depth - i) / (depth + 1.0);
  }
}

void unwind(Path& path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1.0) / ((i + 1.0) * one);
      next = tmp - path[i].weight * zero * (depth - i) / (depth + 1.0);
    } else {
      path[i].weight = path[i].weight * (depth + 1.0) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_sum(const Path& path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  double total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = next * (depth + 1.0) / ((i + 1.0) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * (depth - i) / (depth + 1.0);
    } else if (zero != 0) {
      total += path[i].weight / zero / ((depth - i) / (depth + 1.0));
    }
  }
  return total;
}

void recurse(const ensemble::Tree& tree, const FeatureVector& x, FeatureVector& phi, int node,
             Path path, int depth, double zero, double one, int feature) {
  extend(path, depth, zero, one, feature);
  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_sum(path, depth, i);
      phi[path[i].feature] += w * (path[i].one_fraction - path[i].zero_fraction) * n.value;
    }
    return;
  }
  const int hot = x[n.feature] < n.threshold ? n.left : n.right;
  const int cold = hot == n.left ? n.right : n.left;
  const double hot_cover = tree.nodes[static_cast<std::size_t>(hot)].cover;
  const double cold_cover = tree.nodes[static_cast<std::size_t>(cold)].cover;
  const double total = hot_cover + cold_cover;

  double incoming_zero = 1, incoming_one = 1;
  for (int k = 1; k <= depth; ++k) {
    if (path[k].feature == n.feature) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      unwind(path, depth, k);
      --depth;
      break;
    }
  }
  recurse(tree, x, phi, hot, path, depth + 1, incoming_zero * hot_cover / total, incoming_one,
          n.feature);
  recurse(tree, x, phi, cold, path, depth + 1, incoming_zero * cold_cover / total, 0.0,
          n.feature);
}

}  // namespace

FeatureVector tree_shap(const ensemble::Tree& tree, const FeatureVector& x) {
  FeatureVector phi = FeatureVector::Zero();
  if (tree.nodes.empty() || tree.nodes.front().is_leaf()) return phi;
  Path path(static_cast<std::size_t>(tree.depth() + 2));
  recurse(tree, x, phi, 0, std::move(path), 0, 1.0, 1.0, -1);
  return phi;
}

ClassVector base_value(const ensemble::TreeEnsemble& m) {
  ClassVector sum = ClassVector::Zero();
  for (const auto& round : m.rounds) {
    for (int c = 0; c < kNumClasses; ++c) sum[c] += round[c].expected_value();
  }
  return m.base_score + m.learning_rate * sum;
}

ShapValues explain_instance(const ensemble::TreeEnsemble& m, const FeatureVector& x) {
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteFeature, "non-finite feature value");
  ShapValues out;
  out.instance = x;
  out.base_value = base_value(m);
  for (int c = 0; c < kNumClasses; ++c) {
    FeatureVector sum = FeatureVector::Zero();
    for (const auto& round : m.rounds) sum += tree_shap(round[c], x);
    out.phi.col(c) = m.learning_rate * sum;
  }
  return out;
}

ShapValues explain_instance(const ensemble::TreeEnsemble& m, const Eigen::VectorXd& x) {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::kBadVectorLength, "expected " + std::to_string(kNumFeatures) +
                                                 " features, got " + std::to_string(x.size()));
  }
  return explain_instance(m, FeatureVector(x));
}

std::array<int, kNumFeatures> rank_features(const FeatureVector& importance) {
  std::array<int, kNumFeatures> rank{};
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](int a, int b) { return importance[a] > importance[b]; });
  return rank;
}

GlobalImportance global_importance(const ensemble::TreeEnsemble& m, const FeatureMatrix& x) {
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "importance needs at least one row");
  GlobalImportance g;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const FeatureVector row = x.row(i).transpose();
    const int cls = ensemble::argmax_high(ensemble::predict_margin(m, row));
    g.mean_abs += explain_instance(m, row).phi.col(cls).cwiseAbs();
  }
  g.mean_abs /= static_cast<double>(x.rows());
  g.rank = rank_features(g.mean_abs);
  return g;
}

std::string to_tsv(const GlobalImportance& g, const std::array<std::string, kNumFeatures>& names) {
  std::ostringstream os;
  os.precision(10);
  os << "feature\tmean_abs_shap\n";
  for (int f : g.rank) os << names[f] << '\t' << g.mean_abs[f] << '\n';
  return os.str();
}

}  // namespace mhxai::shap
