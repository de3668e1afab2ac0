// Samples the cube [-1,1]^m with the sparse Dikin walk, then checks the
// radial statistic of the chain against the uniform reference.

#include <cstdio>

#include "polysamp/diagnostics.hpp"
#include "polysamp/model.hpp"
#include "polysamp/walks.hpp"

using namespace polysamp;

int main(int argc, char** argv) {
  const Index m = argc > 1 ? std::atoll(argv[1]) : 10;
  const ConstrainedPolytope cube = make_hypercube(m);
  const Vector x0 = hypercube_center(m);

  WalkConfig cfg;
  cfg.kind = WalkKind::dikin;
  cfg.form = PolytopeForm::sparse_k2;
  cfg.r = 2.0;
  cfg.steps = 2000;
  cfg.thin = 10;
  cfg.seed = 1;

  std::printf("cube m=%lld: %lld coordinates, %lld equality rows\n",
              static_cast<long long>(m), static_cast<long long>(cube.dim()),
              static_cast<long long>(cube.rows()));
  const ChainOutput out = run_chain(cube, x0, cfg);
  const DiagnosticsReport rep = summarize(out, cube, x0);

  std::printf("kept %lld samples (thin %lld), acceptance %.3f\n",
              static_cast<long long>(out.samples.rows()),
              static_cast<long long>(cfg.thin), rep.acceptance_rate);
  std::printf("min coordinate ESS %.1f, %.2e s/step\n", rep.ess_min,
              out.per_step_seconds.mean_seconds());

  const DenseMatrix iid = decorrelate(out.samples, rep.ess_min);
  const KsResult ks = radial_uniformity(iid, cube, x0);
  std::printf("radial KS on %lld decorrelated rows: D=%.4f, p=%.4f\n",
              static_cast<long long>(iid.rows()), ks.statistic, ks.pvalue);
  return ks.pvalue > 0.01 ? 0 : 1;
}
