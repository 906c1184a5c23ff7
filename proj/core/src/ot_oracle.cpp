#include "strotss/ot_oracle.hpp"

#include <cmath>
#include <limits>

#include "strotss/image_ops.hpp"
#include "strotss/sampling.hpp"

namespace strotss {
namespace {

void require_square(const BasicTensor<double>& c) {
  if (c.rank() != 2 || c.dim(0) != c.dim(1)) {
    throw PreconditionError("exact EMD needs a square cost matrix, got " +
                            shape_string(c.shape()));
  }
}

}  // namespace

Assignment exact_emd_uniform(const BasicTensor<double>& cost) {
  require_square(cost);
  const std::size_t n = cost.dim(0);
  for (double v : cost.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw PreconditionError("exact EMD needs finite nonnegative costs");
    }
  }
  // Shortest augmenting paths with row/column potentials. Index 0 is a
  // virtual column used as the path root; rows and columns are 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.permutation[match[j] - 1] = j - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost.at(i, a.permutation[i]);
  a.cost = total / static_cast<double>(n);
  return a;
}

Assignment exact_emd_uniform(const Tensor& cost) {
  return exact_emd_uniform(cost.cast<double>());
}

double relaxed_emd_value(const BasicTensor<double>& cost) {
  BasicGraph<double> g;
  return relaxed_emd(g.constant(cost)).remd.item();
}

double tightness_ratio(const BasicTensor<double>& cost) {
  const double emd = exact_emd_uniform(cost).cost;
  const double remd = relaxed_emd_value(cost);
  return emd == 0.0 ? 1.0 : remd / emd;
}

TightnessStudy remd_tightness_study(const std::vector<FeaturePair>& pairs,
                                    GroundMetric metric) {
  TightnessStudy study;
  for (const FeaturePair& p : pairs) {
    if (p.a.rank() != 2 || p.a.shape() != p.b.shape()) {
      throw PreconditionError("tightness pairs need equal [n,d] feature sets");
    }
    Graph g;
    const Tensor cost = ground_cost(g.constant(p.a), g.constant(p.b), metric).value();
    study.ratios.push_back(tightness_ratio(cost.cast<double>()));
  }
  study.count = study.ratios.size();
  if (study.count == 0) return study;
  double sum = 0.0;
  for (double r : study.ratios) sum += r;
  study.mean = sum / static_cast<double>(study.count);
  double var = 0.0;
  for (double r : study.ratios) var += (r - study.mean) * (r - study.mean);
  study.stddev = std::sqrt(var / static_cast<double>(study.count));
  return study;
}

std::vector<FeaturePair> random_feature_pairs(std::size_t count, std::size_t n,
                                              std::size_t dim, std::uint64_t seed,
                                              bool identical) {
  if (n == 0 || dim == 0) throw PreconditionError("feature sets must be non-empty");
  Rng rng(seed);
  auto draw = [&] {
    Tensor t({n, dim});
    for (float& v : t.data()) v = static_cast<float>(rng.normal());
    return t;
  };
  std::vector<FeaturePair> out;
  for (std::size_t k = 0; k < count; ++k) {
    Tensor a = draw();
    Tensor b = identical ? a : draw();
    out.push_back({std::move(a), std::move(b)});
  }
  return out;
}

FeaturePair image_feature_pair(const Tensor& image_a, const Tensor& image_b,
                               const WeightStore& weights, std::size_t n, Rng& rng,
                               const NetworkSpec& spec) {
  auto features = [&](const Tensor& image) {
    const Extent e{image.dim(1), image.dim(2)};
    const auto acts = extract_activations(image, weights, spec);
    Graph g;
    std::vector<Var> vars;
    for (const auto& a : acts) vars.push_back(g.constant(a));
    const auto coords = sample_style_coords(e.height, e.width, n, rng);
    return sample_hypercolumns<float>(vars, e, coords).values.value();
  };
  return {features(image_a), features(image_b)};
}

std::size_t tightness_memory_estimate(std::size_t n, std::size_t dim) {
  // float cost + double copy + two feature sets + solver vectors.
  if (n > (std::size_t{1} << 24) || dim > (std::size_t{1} << 24)) {
    return std::numeric_limits<std::size_t>::max();
  }
  return n * n * (sizeof(float) + sizeof(double)) + 2 * n * dim * sizeof(float) +
         8 * n * sizeof(double);
}

void check_tightness_budget(std::size_t n, std::size_t dim, std::size_t budget_bytes) {
  const std::size_t need = tightness_memory_estimate(n, dim);
  if (need > budget_bytes) {
    throw ResourceError("n = " + std::to_string(n) + " needs about " +
                        std::to_string(need >> 20) + " MiB, over the " +
                        std::to_string(budget_bytes >> 20) + " MiB budget");
  }
}

}  // namespace strotss
