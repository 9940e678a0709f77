#include "guideboot/oracle_suite.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "guideboot/oracles.h"
#include "guideboot/rng.h"

namespace guideboot::oracles {
namespace {

constexpr double kMeanStandardErrors = 4.0;
constexpr double kVarianceRelTol = 0.02;
constexpr double kRatioRelTol = 1e-12;

std::string fmt(const char* pattern, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

void compare(std::vector<CheckResult>& out, const std::string& label, const MomentPair& mc,
             const MomentPair& reference, std::uint64_t trials) {
  const double se = standard_error(reference, trials);
  const double mean_gap = std::abs(mc.mean - reference.mean);
  out.push_back({label + " mean",
                 mean_gap <= kMeanStandardErrors * se,
                 fmt("mc=%.7g reference=%.7g gap=%.3g SE", mc.mean, reference.mean,
                     se > 0 ? mean_gap / se : 0.0)});
  const double rel = reference.variance > 0
                         ? std::abs(mc.variance - reference.variance) / reference.variance
                         : std::abs(mc.variance);
  out.push_back({label + " variance", rel <= kVarianceRelTol,
                 fmt("mc=%.7g reference=%.7g rel=%.3g", mc.variance, reference.variance, rel)});
}

}  // namespace

std::vector<CheckResult> run_oracle_checks(const SuiteOptions& options) {
  std::vector<CheckResult> out;
  const RngStream root(options.seed);
  const double alpha = 1.0;
  const std::uint64_t n = 50;

  for (std::uint64_t n_s : {1ULL, 0ULL, 25ULL}) {
    RngStream rng = root.derive("mc-" + std::to_string(n_s));
    MomentPair mc = mc_guideboot_estimator(alpha, n, n_s, options.trials, rng, options.workers);
    const std::string tag = "(alpha=1, n=50, n_s=" + std::to_string(n_s) + ")";
    compare(out, "closed form vs monte carlo " + tag, mc,
            guideboot_estimator_stats(alpha, n, n_s), options.trials);
    compare(out, "exact enumeration vs monte carlo " + tag, mc,
            exact_guideboot_construction(alpha, n, n_s), options.trials);
  }

  {
    RngStream rng = root.derive("mean-identity");
    bool ok = true;
    std::string first_failure;
    for (int i = 0; i < 1000; ++i) {
      const double a = 0.01 + 10.0 * rng.uniform();
      const std::uint64_t nn = rng.uniform_index(1000);
      const std::uint64_t ns = nn == 0 ? 0 : rng.uniform_index(nn + 1);
      const double g = guideboot_estimator_stats(a, nn, ns).mean;
      const double b = beta_posterior_stats(a, nn, ns).mean;
      if (g != b && ok) {
        ok = false;
        first_failure = fmt("alpha=%.6g n=%.0f n_s=%.0f", a, static_cast<double>(nn),
                            static_cast<double>(ns));
      }
    }
    out.push_back({"guideboot mean equals beta posterior mean (1000 random cases)", ok,
                   ok ? "all equal" : first_failure});
  }

  for (std::uint64_t nn : {20ULL, 50ULL, 200ULL}) {
    const double expected = (2 * alpha + nn + 1) / (2 * alpha + nn);
    const double ratio = guideboot_estimator_stats(alpha, nn, nn / 3).variance /
                         beta_posterior_stats(alpha, nn, nn / 3).variance;
    out.push_back({"variance ratio (2a+n+1)/(2a+n) at n=" + std::to_string(nn),
                   std::abs(ratio - expected) <= kRatioRelTol * expected,
                   fmt("ratio=%.15g expected=%.15g diff=%.3g", ratio, expected, ratio - expected)});
  }

  {
    const MomentPair boot = bootstrap_estimator_stats(50, 0);
    const MomentPair guided = guideboot_estimator_stats(1.0, 50, 0);
    out.push_back({"degenerate case: bootstrap variance is zero at n=50, n_s=0",
                   boot.variance == 0.0, fmt("variance=%.6g mean=%.6g n=%.0f", boot.variance,
                                             boot.mean, 50.0)});
    out.push_back({"degenerate case: guideboot mean 1/52 and positive variance",
                   guided.mean == 1.0 / 52.0 && guided.variance > 0.0,
                   fmt("mean=%.9g expected=%.9g variance=%.6g", guided.mean, 1.0 / 52.0,
                       guided.variance)});
  }
  return out;
}

}  // namespace guideboot::oracles
