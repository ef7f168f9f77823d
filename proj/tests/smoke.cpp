#include <cstdio>

#include "spantree/json_io.hpp"

using namespace spantree;

int main() {
  // NAND program + analysis
  auto nand = DirectFunctionSpec::nand_fn();
  auto p = normalize_trivial(build_program(nand));
  auto analysis = analyze(p);
  std::printf("NAND omega = %.12f\n", analysis.omega);
  for (std::uint32_t x = 0; x < 4; ++x)
    std::printf("  x=%u value=%d wsize=%.9f trivial=%d strong=%d%d\n", x,
                analysis.per_input[x].value, analysis.per_input[x].wsize,
                (int)analysis.per_input[x].trivial, (int)analysis.per_input[x].strong[0],
                (int)analysis.per_input[x].strong[1]);

  // MAJ3
  auto maj = DirectFunctionSpec::threshold_fn(3, 2);
  auto pm = normalize_trivial(build_program(maj));
  auto am = analyze(pm);
  std::printf("MAJ3 omega = %.9f\n", am.omega);
  for (std::uint32_t x = 0; x < 8; ++x)
    std::printf("  x=%u value=%d wsize=%.9f trivial=%d\n", x, am.per_input[x].value,
                am.per_input[x].wsize, (int)am.per_input[x].trivial);

  // NAND gadgets
  auto g = default_gadgets(analysis);
  std::printf("NAND gadgets n0=%d k0=%d sizes=%zu,%zu uniform=%d\n", g.n0, g.k0,
              g.trees[0].size(), g.trees[1].size(), (int)g.has_uniform_leaf_marginals());
  for (int r = 0; r < 2; ++r)
    for (auto& t : g.trees[r])
      std::printf("  r=%d leaves=%d%d%d%d w=%lld/%lld\n", r, t.leaves[0], t.leaves[1], t.leaves[2],
                  t.leaves[3], (long long)t.weight.num, (long long)t.weight.den);

  // MAJ3 gadget search
  try {
    auto gm = default_gadgets(am);
    std::printf("MAJ3 gadgets n0=%d k0=%d sizes=%zu,%zu uniform=%d\n", gm.n0, gm.k0,
                gm.trees[0].size(), gm.trees[1].size(), (int)gm.has_uniform_leaf_marginals());
  } catch (const std::exception& e) {
    std::printf("MAJ3 gadget search failed: %s\n", e.what());
  }

  // Hard dist sample, k=1, n=8
  auto spec = make_hard_dist_spec(nand, 8, 1);
  auto oracle = sample_hard_tree(spec, 42);
  auto tree = materialize(*oracle);
  auto ann = annotate(analysis, tree);
  std::printf("T1 n=8 root=%d true_root=%d maxkappa=%u cat=%d\n", eval_tree(nand, tree),
              oracle->true_root(), ann.max_fault_depth(), oracle->category_of_block(0, {}));

  // Posterior: first query = 1/2
  PosteriorTracker tracker(spec);
  std::printf("fresh: S=%g conf=%g\n", tracker.survival_total(), tracker.confidence());
  Path path(8, 0);
  tracker.update(path, oracle->query(path));
  const auto& pc = tracker.category_posterior();
  bool all_half = true;
  for (int i = 0; i < pc.rows(); ++i)
    for (int r = 0; r < 2; ++r)
      if (pc(i, r) != 0.5) all_half = false;
  std::printf("after first query: all p = 1/2 exactly? %d, S=%g D=%g\n", (int)all_half,
              tracker.survival_total(), tracker.split_difference());

  // Ratio recursion three cases at E=1e-3
  {
    EvalTree t00(2, 1, {0, 0});
    auto st = propagate_ratios(nand, t00, 1e-3);
    std::printf("case00: y0=%.9g (expect ~%.9g) complexity=%.9g\n", st.root_ratio(), 1e-3 / 2,
                st.root_complexity());
    EvalTree t11(2, 1, {1, 1});
    auto st2 = propagate_ratios(nand, t11, 1e-3);
    std::printf("case11: y0=%.9g (expect %.9g) complexity=%.9g\n", st2.root_ratio(),
                -1.0 / (3 * 1e-3), st2.root_complexity());
    EvalTree t10(2, 1, {1, 0});
    auto st3 = propagate_ratios(nand, t10, 1e-3);
    std::printf("case10: y0=%.9g (expect ~%.9g) complexity=%.9g\n", st3.root_ratio(), 1e-3,
                st3.root_complexity());
  }

  // Spectrum of single Y gadget
  {
    EvalTree t00(2, 1, {0, 0});
    auto graph = build_walk_graph(nand, t00);
    auto spectrum = hamiltonian_spectrum(graph);
    std::printf("Y gadget nodes=%d edges=%zu eigs:", graph.node_count, graph.edges.size());
    for (Index i = 0; i < spectrum.eigenvalues.size(); ++i)
      std::printf(" %.9f", spectrum.eigenvalues(i));
    std::printf(" resid=%.2e gap=%g\n", spectrum.max_residual, spectrum.root_gap);
  }

  // Trivial tree propagation growth
  for (int n = 2; n <= 10; n += 2) {
    auto t = trivial_tree(nand, 1, n);
    auto st = propagate_ratios(nand, t, 1e-6);
    std::printf("trivial n=%d root complexity=%.6f\n", n, st.root_complexity());
  }
  return 0;
}
