#include "bounty/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "bounty/error.hpp"

namespace bounty {

namespace {

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ConstantModel fit_constant(const Dataset& dataset) {
  if (dataset.rows() == 0) throw Error(Errc::empty_dataset, "cannot fit a constant to zero rows");
  return ConstantModel{mean_of(dataset.labels())};
}

// ---------------------------------------------------------------------------
// Ridge regression

LinearModel fit_linear(const Dataset& dataset, double ridge) {
  if (dataset.rows() == 0) throw Error(Errc::empty_dataset, "cannot fit a linear model to zero rows");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw Error(Errc::bad_config, "ridge must be a finite non-negative number");
  }
  const auto& schema = dataset.schema();
  const auto n = dataset.rows();

  struct DesignColumn {
    std::size_t feature;
    std::int32_t code;  // -1 for numeric columns
  };
  std::vector<DesignColumn> design;
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    const auto& spec = schema.feature(f);
    if (spec.kind == FeatureKind::numeric) {
      design.push_back({f, -1});
    } else {
      const std::size_t first = ridge > 0.0 ? 0 : 1;
      for (std::size_t c = first; c < spec.allowed_values.size(); ++c) {
        design.push_back({f, static_cast<std::int32_t>(c)});
      }
    }
  }
  const auto p = static_cast<Eigen::Index>(design.size());

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = design[static_cast<std::size_t>(j)];
    if (col.code < 0) {
      const auto values = dataset.numeric(col.feature);
      for (std::size_t r = 0; r < n; ++r) x(static_cast<Eigen::Index>(r), j) = values[r];
    } else {
      const auto codes = dataset.codes(col.feature);
      for (std::size_t r = 0; r < n; ++r) {
        x(static_cast<Eigen::Index>(r), j) = codes[r] == col.code ? 1.0 : 0.0;
      }
    }
  }
  const auto labels = dataset.labels();
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) y(static_cast<Eigen::Index>(r)) = labels[r];

  // Centering removes the unpenalized intercept from the system.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  x.rowwise() -= x_mean;
  y.array() -= y_mean;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += ridge;
    const Eigen::VectorXd rhs = x.transpose() * y;
    // Diagonal scaling makes the rank test independent of column units.
    Eigen::VectorXd scale = gram.diagonal().array().sqrt();
    if ((scale.array() <= 0.0).any()) {
      throw Error(Errc::singular_system, "design has a constant column and ridge is zero");
    }
    const Eigen::VectorXd inv = scale.cwiseInverse();
    const Eigen::MatrixXd scaled = inv.asDiagonal() * gram * inv.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    lu.setThreshold(1e-10);
    if (lu.rank() < p) {
      throw Error(Errc::singular_system, "normal equations are rank deficient");
    }
    const Eigen::VectorXd z = lu.solve(inv.asDiagonal() * rhs);
    beta = inv.asDiagonal() * z;
  }

  LinearModel model;
  model.intercept = y_mean - x_mean.dot(beta);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = design[static_cast<std::size_t>(j)];
    const auto& spec = schema.feature(col.feature);
    if (col.code < 0) {
      model.numeric[spec.name] = beta(j);
    } else {
      model.categorical[spec.name][spec.allowed_values[static_cast<std::size_t>(col.code)]] = beta(j);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Regression tree

namespace {

struct Split {
  double gain = 0.0;
  std::size_t feature = 0;
  SplitRule rule;
  std::vector<std::uint8_t> left_codes;  // categorical only
  bool found = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& dataset, std::size_t max_depth, std::size_t min_leaf)
      : dataset_(dataset),
        labels_(dataset.labels()),
        max_depth_(max_depth),
        min_leaf_(std::max<std::size_t>(min_leaf, 1)) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(dataset_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  void grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = tree_.nodes.size();
    tree_.nodes.emplace_back();

    double sum = 0.0;
    for (auto r : rows) sum += labels_[r];
    const double mean = sum / static_cast<double>(rows.size());
    tree_.nodes[index].value = mean;

    if (depth >= max_depth_ || rows.size() < 2 * min_leaf_) return;

    // Work with labels shifted by the node mean to limit cancellation.
    std::vector<double> shifted(rows.size());
    double sse = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      shifted[i] = labels_[rows[i]] - mean;
      sse += shifted[i] * shifted[i];
    }
    if (sse <= 0.0) return;
    double total = 0.0;
    for (double s : shifted) total += s;

    Split best;
    const auto& schema = dataset_.schema();
    for (std::size_t f = 0; f < schema.feature_count(); ++f) {
      if (schema.feature(f).kind == FeatureKind::numeric) {
        scan_numeric(f, rows, shifted, total, best);
      } else {
        scan_categorical(f, rows, shifted, total, best);
      }
    }
    if (!best.found || !(best.gain > 1e-12 * sse)) return;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (goes_left(best, r) ? left : right).push_back(r);

    TreeNode node;
    node.feature = schema.feature(best.feature).name;
    node.rule = best.rule;
    node.value = 0.0;
    node.left = static_cast<std::int32_t>(tree_.nodes.size());
    grow(left, depth + 1);
    node.right = static_cast<std::int32_t>(tree_.nodes.size());
    grow(right, depth + 1);
    tree_.nodes[index] = std::move(node);
  }

  bool goes_left(const Split& split, std::size_t row) const {
    if (const auto* t = std::get_if<double>(&split.rule)) {
      return dataset_.numeric(split.feature)[row] <= *t;
    }
    return split.left_codes[static_cast<std::size_t>(dataset_.codes(split.feature)[row])] != 0;
  }

  static double gain_of(double left_sum, std::size_t left_n, double total, std::size_t n) {
    const double right_sum = total - left_sum;
    const auto right_n = n - left_n;
    return left_sum * left_sum / static_cast<double>(left_n) +
           right_sum * right_sum / static_cast<double>(right_n) -
           total * total / static_cast<double>(n);
  }

  void scan_numeric(std::size_t f, const std::vector<std::size_t>& rows,
                    const std::vector<double>& shifted, double total, Split& best) const {
    const auto values = dataset_.numeric(f);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[rows[a]] < values[rows[b]];
    });
    const auto n = rows.size();
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += shifted[order[i]];
      const double here = values[rows[order[i]]];
      const double next = values[rows[order[i + 1]]];
      if (!(here < next)) continue;
      const auto left_n = i + 1;
      if (left_n < min_leaf_ || n - left_n < min_leaf_) continue;
      const double gain = gain_of(left_sum, left_n, total, n);
      if (!best.found || gain > best.gain) {
        double threshold = here + (next - here) / 2.0;
        if (!(threshold < next)) threshold = here;
        best.found = true;
        best.gain = gain;
        best.feature = f;
        best.rule = threshold;
        best.left_codes.clear();
      }
    }
  }

  void scan_categorical(std::size_t f, const std::vector<std::size_t>& rows,
                        const std::vector<double>& shifted, double total, Split& best) const {
    const auto codes = dataset_.codes(f);
    const auto& values = dataset_.schema().feature(f).allowed_values;
    std::vector<double> sums(values.size(), 0.0);
    std::vector<std::size_t> counts(values.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto c = static_cast<std::size_t>(codes[rows[i]]);
      sums[c] += shifted[i];
      ++counts[c];
    }
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (counts[c] > 0) present.push_back(c);
    }
    std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
      return sums[a] / static_cast<double>(counts[a]) < sums[b] / static_cast<double>(counts[b]);
    });
    const auto n = rows.size();
    double left_sum = 0.0;
    std::size_t left_n = 0;
    for (std::size_t k = 0; k + 1 < present.size(); ++k) {
      left_sum += sums[present[k]];
      left_n += counts[present[k]];
      if (left_n < min_leaf_ || n - left_n < min_leaf_) continue;
      const double gain = gain_of(left_sum, left_n, total, n);
      if (!best.found || gain > best.gain) {
        best.found = true;
        best.gain = gain;
        best.feature = f;
        best.left_codes.assign(values.size(), 0);
        for (std::size_t j = 0; j <= k; ++j) best.left_codes[present[j]] = 1;
        std::vector<std::string> left_values;
        for (std::size_t c = 0; c < values.size(); ++c) {
          if (best.left_codes[c]) left_values.push_back(values[c]);
        }
        best.rule = std::move(left_values);
      }
    }
  }

  const Dataset& dataset_;
  std::span<const double> labels_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
  RegressionTree tree_;
};

}  // namespace

RegressionTree fit_tree(const Dataset& dataset, std::size_t max_depth, std::size_t min_leaf) {
  if (dataset.rows() == 0) throw Error(Errc::empty_dataset, "cannot fit a tree to zero rows");
  return TreeBuilder(dataset, max_depth, min_leaf).build();
}

}  // namespace bounty
