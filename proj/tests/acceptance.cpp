// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ids...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "fig2_fixture.hpp"
#include "gradcheck.hpp"
#include "imvc/dataio.hpp"
#include "imvc/dtree.hpp"
#include "imvc/kmeans.hpp"
#include "imvc/metrics.hpp"
#include "imvc/nncore.hpp"
#include "imvc/pipeline.hpp"
#include "imvc/serialize.hpp"
#include "imvc/tao.hpp"
#include "oracles.hpp"

using namespace imvc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (first_.empty()) first_ = what;
  }
  void close(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol, what + ": got " + std::to_string(got));
  }
  Outcome outcome(std::string summary) const {
    if (failures_ == 0) return {true, std::move(summary)};
    return {false, std::to_string(failures_) + " failure(s), first: " + first_};
  }

 private:
  std::size_t failures_ = 0;
  std::string first_;
};

using ML = std::vector<metrics::Label>;

Outcome formula_suite() {
  Checker c;
  using dtree::Label;
  c.expect(dtree::gini(std::vector<Label>{0, 0, 0}) == 0.0, "gini [a,a,a]");
  c.expect(dtree::gini(std::vector<Label>{0, 0, 1, 1}) == 0.5, "gini [a,a,b,b]");
  c.close(dtree::gini(std::vector<Label>{0, 0, 1}), 4.0 / 9.0, 1e-15, "gini [a,a,b]");

  const Matrix x{{1}, {2}, {3}, {4}};
  const std::vector<Label> y{0, 0, 1, 1};
  c.expect(dtree::split_gini(x, y, 0, 2.5) == 0.0, "split_gini perfect");
  c.expect(dtree::split_gini(x, y, 0, 10.0) == dtree::gini(y), "split_gini degenerate");

  c.expect(nn::soft_assignment(Matrix{{3, -1}}, Matrix{{0, 0}}) == Matrix{{1}}, "soft K=1");
  const auto eq = nn::soft_assignment(Matrix{{0}}, Matrix{{-1}, {1}});
  c.expect(eq(0, 0) == 0.5 && eq(0, 1) == 0.5, "soft equidistant");
  const auto s = nn::soft_assignment(Matrix{{0}}, Matrix{{0}, {1}});
  c.close(s(0, 0), 2.0 / 3.0, 1e-9, "soft (2/3)");
  c.close(s(0, 1), 1.0 / 3.0, 1e-9, "soft (1/3)");

  c.expect(nn::cross_entropy_loss(Matrix{{1, 0}}, Matrix{{1, 0}}) == 0.0, "ce one-hot");
  c.close(nn::cross_entropy_loss(Matrix{{1, 0}}, Matrix{{0.5, 0.5}}), std::log(2.0), 1e-9, "ce ln2");
  c.close(nn::cross_entropy_loss(Matrix{{1, 0}, {0, 1}}, Matrix{{0.5, 0.5}, {0.5, 0.5}}),
          2 * std::log(2.0), 1e-9, "ce 2 ln2");

  c.expect(metrics::purity(ML{0, 1, 1}, ML{0, 1, 1}) == 1.0, "purity identical");
  c.expect(metrics::purity(ML{0, 0, 0, 0}, ML{0, 0, 1, 1}) == 0.5, "purity constant");
  c.close(metrics::purity(ML{0, 0, 0, 1, 1}, ML{1, 1, 2, 2, 2}), 0.8, 1e-15, "purity 0.8");

  c.expect(metrics::clustering_accuracy(ML{2, 2, 0, 0}, ML{0, 0, 1, 1}) == 1.0, "acc relabeled");
  c.expect(metrics::clustering_accuracy(ML{0, 0, 1, 1}, ML{0, 1, 0, 1}) == 0.5, "acc 0.5");
  c.expect(metrics::clustering_accuracy(ML{3}, ML{5}) == 1.0, "acc single");

  auto f = metrics::pairwise_f1(ML{0, 0, 1, 1}, ML{0, 0, 1, 1});
  c.expect(f.precision == 1.0 && f.recall == 1.0 && f.f1 == 1.0, "f1 identical");
  f = metrics::pairwise_f1(ML{0, 0, 0, 0}, ML{0, 0, 1, 1});
  c.expect(f.pairs.tp == 2 && f.pairs.fp == 4 && f.pairs.fn == 0, "f1 pair counts");
  c.close(f.precision, 1.0 / 3.0, 1e-15, "f1 precision");
  c.expect(f.recall == 1.0, "f1 recall");
  c.close(f.f1, 0.5, 1e-15, "f1 value");
  f = metrics::pairwise_f1(ML{0, 1, 2, 3}, ML{0, 0, 1, 1});
  c.expect(f.recall == 0.0 && f.f1 == 0.0, "f1 singletons");
  return c.outcome("all formula examples match");
}

Outcome gradient_fidelity() {
  Checker c;
  Rng rng(2020);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t in = 2 + oracle::rand_index(rng, 5);
    const std::size_t h1 = 3 + oracle::rand_index(rng, 6), h2 = 2 + oracle::rand_index(rng, 3);
    nn::Autoencoder ae(in, {h1, h2}, 500 + t);
    oracle::randomize_biases(ae, rng);
    c.expect(ae.parameter_count() <= 500, "parameter budget");
    const std::size_t n = 3 + oracle::rand_index(rng, 6), k = 2 + oracle::rand_index(rng, 3);
    const Matrix x = oracle::random_matrix(rng, n, in, -2, 2);
    const double rec = oracle::finite_difference_check(ae, x, nullptr, nullptr, 0.0).weights;
    Matrix centers = oracle::random_matrix(rng, k, h2, -1, 1);
    Matrix ind(n, k, 0.0);
    for (std::size_t i = 0; i < n; ++i) ind(i, oracle::rand_index(rng, k)) = 1.0;
    const auto full = oracle::finite_difference_check(ae, x, &centers, &ind, 0.1 + t * 0.05);
    worst = std::max({worst, rec, full.weights, full.centers});
  }
  c.expect(worst <= 1e-4, "max relative error " + std::to_string(worst));
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.2e", worst);
  return c.outcome(buf);
}

Outcome hungarian_oracle() {
  Checker c;
  Rng rng(3030);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 5;
    Matrix cost = oracle::random_matrix(rng, k, k, 0.0, 100.0);
    // Integer-valued costs keep every sum exact, so equality is exact.
    for (double& v : cost.values()) v = std::floor(v);
    const auto a = metrics::hungarian(cost);
    c.expect(metrics::assignment_cost(cost, a) == oracle::brute_assignment(cost),
             "matrix " + std::to_string(t));
  }
  return c.outcome("200 matrices, K in 2..6");
}

Outcome tao_monotonicity() {
  Checker c;
  Rng rng(4040);
  std::size_t passes = 0, max_iter = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 20 + oracle::rand_index(rng, 181), d = 1 + oracle::rand_index(rng, 5);
    const std::size_t k = 2 + oracle::rand_index(rng, 3);
    const Matrix x = oracle::random_matrix(rng, n, d);
    std::vector<dtree::Label> y(n);
    for (auto& l : y) l = oracle::rand_index(rng, k);
    dtree::DecisionTree tree;
    if (t % 2 == 0) {
      tree = oracle::random_tree(rng, d, k, 2 + oracle::rand_index(rng, 5));
    } else {
      // Tree grown for one labeling, refined against another.
      std::vector<dtree::Label> other(n);
      for (std::size_t i = 0; i < n; ++i) other[i] = x(i, 0) > 0 ? 0 : 1 + oracle::rand_index(rng, k - 1);
      tree = dtree::build_tree(x, other, k, {6, 5});
    }

    dtree::DecisionTree fixed = tree;
    std::size_t loss = dtree::misclassification(fixed, x, y), size = fixed.size();
    for (int p = 0; p < 5; ++p, ++passes) {
      tao::tao_pass(fixed, x, y);
      const auto now = dtree::misclassification(fixed, x, y);
      c.expect(now <= loss, "fixed-label pass increased loss (case " + std::to_string(t) + ")");
      c.expect(fixed.size() <= size, "fixed-label pass grew the tree");
      loss = now;
      size = fixed.size();
    }

    const auto r = tao::optimize_tree(tree, x, y);
    max_iter = std::max(max_iter, r.iterations);
    c.expect(r.converged && r.iterations <= 50, "optimize_tree did not terminate");
    for (std::size_t i = 0; i < r.iterations; ++i)
      c.expect(r.loss_after[i] <= r.loss_before[i], "pass increased loss");
    for (std::size_t i = 1; i < r.node_counts.size(); ++i)
      c.expect(r.node_counts[i] <= r.node_counts[i - 1], "node count increased");
    passes += r.iterations;
  }
  return c.outcome(std::to_string(passes) + " passes checked, max optimize_tree iterations " +
                   std::to_string(max_iter));
}

Outcome fig2_scenario() {
  Checker c;
  fixture::Fig2 f;
  const auto reach = tao::compute_reach(f.tree, f.x);
  c.expect(reach[f.node].size() == 5, "five instances reach the node");
  const auto care = tao::care_set(f.tree, f.node, reach[f.node], f.x, f.labels);
  c.expect(care.size() == 4, "x2 is excluded from the care set");
  const auto u = tao::optimize_node(f.tree, f.node, reach[f.node], f.x, f.labels);
  c.expect(u.objective_before == 1, "objective before = " + std::to_string(u.objective_before));
  c.expect(u.objective_after == 0, "objective after = " + std::to_string(u.objective_after));
  return c.outcome("node objective 1 -> 0");
}

Outcome best_split_oracle() {
  Checker c;
  Rng rng(6060);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + oracle::rand_index(rng, 49), d = 1 + oracle::rand_index(rng, 8);
    const std::size_t k = 2 + oracle::rand_index(rng, 3);
    Matrix x = oracle::random_matrix(rng, n, d);
    if (t % 3 == 0)  // coarse grid forces repeated values and score ties
      for (double& v : x.values()) v = std::round(v * 3);
    std::vector<dtree::Label> y(n);
    for (auto& l : y) l = oracle::rand_index(rng, k);
    const auto got = dtree::best_split(x, y, k);
    const auto want = oracle::brute_best_split(x, y, k);
    c.expect(got.has_value() == want.has_value(), "existence differs");
    if (got && want) {
      c.expect(got->feature == want->feature, "feature differs (case " + std::to_string(t) + ")");
      c.expect(got->threshold == want->threshold, "threshold differs (case " + std::to_string(t) + ")");
    }
  }
  return c.outcome("100 data sets");
}

struct EndToEnd {
  bool ran = false;
  std::vector<metrics::Report> tree, pseudo;
  double seconds = 0.0;
};

EndToEnd& end_to_end() {
  static EndToEnd e;
  if (e.ran) return e;
  e.ran = true;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    dataio::SynthConfig sc;
    sc.k = 3;
    sc.views = 3;
    sc.n_per_cluster = 200;
    sc.noise = 0.5;
    sc.seed = seed;
    const auto data = dataio::synth_multiview(sc);
    pipeline::PipelineConfig pc;
    pc.k = 3;
    pc.seed = seed;
    const auto model = pipeline::fit(data.views, pc);
    e.tree.push_back(metrics::evaluate(metrics::to_labels(std::span<const dtree::Label>(model.labels.hard)), *data.truth));
    e.pseudo.push_back(metrics::evaluate(metrics::to_labels(std::span<const dtree::Label>(model.pseudo_labels)), *data.truth));
    std::printf("  seed %llu: tree purity=%.3f acc=%.3f f1=%.3f | k-means purity=%.3f acc=%.3f f1=%.3f | cycles=%zu\n",
                static_cast<unsigned long long>(seed), e.tree.back().purity, e.tree.back().accuracy,
                e.tree.back().f1, e.pseudo.back().purity, e.pseudo.back().accuracy, e.pseudo.back().f1,
                model.cycles_run);
    std::fflush(stdout);
  }
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

Outcome end_to_end_quality() {
  const auto& e = end_to_end();
  std::size_t good = 0;
  for (const auto& r : e.tree) good += (r.accuracy >= 0.95 && r.purity >= 0.95) ? 1 : 0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu/10 seeds with ACC and purity >= 0.95 (%.0f s total, %.1f s per run)",
                good, e.seconds, e.seconds / 10);
  return {good >= 8, buf};
}

Outcome tree_fidelity_gap() {
  const auto& e = end_to_end();
  double worst = 0.0;
  for (std::size_t s = 0; s < e.tree.size(); ++s) {
    const auto& t = e.tree[s];
    const auto& p = e.pseudo[s];
    worst = std::max(worst, std::abs((t.purity + t.accuracy + t.f1) - (p.purity + p.accuracy + p.f1)) / 3);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "largest average-metric gap over 10 seeds %.4f", worst);
  return {worst <= 0.05, buf};
}

Outcome determinism() {
  dataio::SynthConfig sc;
  sc.n_per_cluster = 60;
  sc.seed = 77;
  const auto data = dataio::synth_multiview(sc);
  pipeline::PipelineConfig pc;
  pc.k = 3;
  pc.seed = 5;
  pc.e1 = 50;
  pc.e2 = 50;
  pc.outer_cycles = 2;
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "imvc_acceptance_a.bin", b = dir / "imvc_acceptance_b.bin";
  serialize::save_model(pipeline::fit(data.views, pc), a);
  serialize::save_model(pipeline::fit(data.views, pc), b);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto ba = slurp(a), bb = slurp(b);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  return {!ba.empty() && ba == bb, std::to_string(ba.size()) + "-byte models compared"};
}

Outcome kmeans_properties() {
  Checker c;
  Rng rng(1010);
  std::size_t brute = 0;
  for (int t = 0; t < 100; ++t) {
    const bool tiny = t % 2 == 0;
    const std::size_t n = tiny ? 3 + oracle::rand_index(rng, 8) : 20 + oracle::rand_index(rng, 100);
    const std::size_t k = tiny ? 1 + oracle::rand_index(rng, 3) : 2 + oracle::rand_index(rng, 5);
    const std::size_t d = 1 + oracle::rand_index(rng, 3);
    const Matrix z = oracle::random_matrix(rng, n, d, -5, 5);
    const auto r = kmeans::lloyd(z, kmeans::kmeanspp_init(z, k, 100 + t), 300, 0.0);
    for (std::size_t i = 1; i < r.sse_history.size(); ++i)
      c.expect(r.sse_history[i] <= r.sse_history[i - 1] * (1 + 1e-12) + 1e-12,
               "SSE increased (case " + std::to_string(t) + ")");
    if (!tiny) continue;
    ++brute;
    // Local optimality: every point sits at its nearest center, every center
    // is the mean of its points, and no labeling beats the global minimum.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double dj = 0, dl = 0;
        for (std::size_t q = 0; q < d; ++q) {
          dj += std::pow(z(i, q) - r.centers(j, q), 2);
          dl += std::pow(z(i, q) - r.centers(r.labels[i], q), 2);
        }
        c.expect(dl <= dj + 1e-9, "point not at nearest center");
      }
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> mean(d, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (r.labels[i] == j) {
          ++cnt;
          for (std::size_t q = 0; q < d; ++q) mean[q] += z(i, q);
        }
      c.expect(cnt > 0, "empty cluster");
      for (std::size_t q = 0; cnt && q < d; ++q) c.close(r.centers(j, q), mean[q] / cnt, 1e-9, "center is not the mean");
    }
    c.expect(r.sse >= oracle::brute_kmeans_sse(z, k) - 1e-9, "SSE below global minimum");
  }
  return c.outcome("100 instances, " + std::to_string(brute) + " brute-force checked");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"formula unit suite", formula_suite},
      {"gradient fidelity", gradient_fidelity},
      {"hungarian oracle equivalence", hungarian_oracle},
      {"tao monotonicity", tao_monotonicity},
      {"toy node scenario", fig2_scenario},
      {"best_split oracle equivalence", best_split_oracle},
      {"end-to-end synthetic quality", end_to_end_quality},
      {"tree fidelity gap", tree_fidelity_gap},
      {"determinism", determinism},
      {"k-means properties", kmeans_properties},
  };
  const std::vector<double> budget{1, 30, 10, 60, 1, 30, 300 * 10, 0, 0, 0};

  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget[i] > 0 && secs > budget[i]) {
      o.pass = false;
      o.detail += " (over time budget)";
    }
    std::printf("[%s] %2zu %-32s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
