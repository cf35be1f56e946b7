#include "ampcc/gradient_suite.hpp"

#include <algorithm>
#include <random>

#include "ampcc/esdf.hpp"
#include "ampcc/high_mpcc.hpp"
#include "ampcc/low_mpc.hpp"
#include "ampcc/optimizer.hpp"
#include "ampcc/reference_trajectory.hpp"
#include "ampcc/voxel_grid.hpp"

namespace ampcc {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 uniform_vec(Rng& rng, double lo, double hi) {
  return Vec3(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
}

/// 4x4x4 m cube at 0.1 m resolution; cluttered variant holds a few random
/// boxes, the open variant is obstacle-free (constant large distance field).
EsdfField make_field(Rng& rng, bool cluttered) {
  VoxelGrid grid(Vec3::Zero(), 0.1, Vec3i(40, 40, 40));
  if (cluttered) {
    const int boxes = 3;
    for (int b = 0; b < boxes; ++b) {
      const Vec3 center = uniform_vec(rng, 0.8, 3.2);
      const Vec3 half = uniform_vec(rng, 0.15, 0.45);
      const Vec3i dims = grid.dims();
      for (int k = 0; k < dims.z(); ++k)
        for (int j = 0; j < dims.y(); ++j)
          for (int i = 0; i < dims.x(); ++i) {
            const Vec3 c = grid.index_to_world(Vec3i(i, j, k));
            if (((c - center).cwiseAbs() - half).maxCoeff() <= 0.0)
              grid.set_occupied(Vec3i(i, j, k));
          }
    }
  }
  return EsdfField::build(grid);
}

/// A start position with active clearance penalty (0 < c < c_thr) when the
/// map is cluttered, or any comfortably free spot otherwise.
Vec3 sample_position(Rng& rng, const EsdfField& field, bool want_near, double c_thr) {
  Vec3 fallback = uniform_vec(rng, 1.0, 3.0);
  for (int attempt = 0; attempt < 300; ++attempt) {
    const Vec3 p = uniform_vec(rng, 0.5, 3.5);
    const double c = field.query(p).value;
    if (want_near && c > 0.05 && c < c_thr) return p;
    if (!want_near && c > c_thr + 0.2) return p;
    if (c > 0.05) fallback = p;
  }
  return fallback;
}

std::vector<Vec3> random_walk(Rng& rng, const Vec3& start, int count, double step_lo,
                              double step_hi) {
  std::vector<Vec3> pts;
  pts.reserve(count);
  Vec3 p = start;
  pts.push_back(p);
  for (int i = 1; i < count; ++i) {
    Vec3 dir = uniform_vec(rng, -1.0, 1.0);
    if (dir.norm() < 1e-9) dir = Vec3(1, 0, 0);
    dir.normalize();
    p += dir * uniform(rng, step_lo, step_hi);
    p = p.cwiseMax(Vec3::Constant(0.5)).cwiseMin(Vec3::Constant(3.5));
    pts.push_back(p);
  }
  return pts;
}

VecX random_vec(Rng& rng, int n, double lo, double hi) {
  VecX x(n);
  for (int i = 0; i < n; ++i) x[i] = uniform(rng, lo, hi);
  return x;
}

void record(TermReport& report, bool cluttered, double error) {
  double& slot = cluttered ? report.cluttered_error : report.open_error;
  slot = std::max(slot, error);
}

}  // namespace

GradientSuiteResult run_gradient_suite(const PlannerConfig& config,
                                       const GradientSuiteOptions& options) {
  if (options.trials < 1) throw ContractError("gradient suite: trials must be >= 1");

  GradientSuiteResult out;
  out.terms = {{"J_s", 0, 0}, {"J_c", 0, 0}, {"J_u", 0, 0}, {"f_s", 0, 0},
               {"f_p", 0, 0}, {"f_e", 0, 0}, {"f_c", 0, 0}, {"f_d", 0, 0}};
  TermReport& t_js = out.terms[0];
  TermReport& t_jc = out.terms[1];
  TermReport& t_ju = out.terms[2];
  TermReport& t_fs = out.terms[3];
  TermReport& t_fp = out.terms[4];
  TermReport& t_fe = out.terms[5];
  TermReport& t_fc = out.terms[6];
  TermReport& t_fd = out.terms[7];

  std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                    static_cast<std::uint32_t>(options.seed >> 32), 0x9e3779b9u};
  Rng rng(seq);

  for (int trial = 0; trial < options.trials; ++trial) {
    const bool cluttered = (trial % 2) == 0;
    const EsdfField field = make_field(rng, cluttered);

    // --- reference layer terms -------------------------------------------
    const LowMpcConfig& lc = config.low_mpc;
    const int m = lc.horizon;
    const Vec3 g0 = sample_position(rng, field, cluttered, lc.clearance_threshold);
    const std::vector<Vec3> guide = random_walk(rng, g0, m + 1, 0.1, 0.3);
    const VecX low_x = random_vec(rng, 3 * m, -1.0, 1.0);

    struct LowTerm {
      TermReport* report;
      LowMpcConfig cfg;
    };
    LowTerm low_terms[3] = {{&t_js, lc}, {&t_jc, lc}, {&t_ju, lc}};
    low_terms[0].cfg.kappa_clearance = 0.0;
    low_terms[0].cfg.kappa_smoothness = 0.0;
    low_terms[1].cfg.kappa_similarity = 0.0;
    low_terms[1].cfg.kappa_smoothness = 0.0;
    low_terms[2].cfg.kappa_similarity = 0.0;
    low_terms[2].cfg.kappa_clearance = 0.0;
    for (LowTerm& term : low_terms) {
      const LowMpcConfig& cfg = term.cfg;
      Objective obj = [&](const VecX& x, VecX& grad) {
        return low_cost_and_gradient(x, guide, field, cfg, grad).total;
      };
      record(*term.report, cluttered,
             check_gradient(obj, low_x, options.fd_step).max_relative_error);
    }

    // --- local layer terms ------------------------------------------------
    const HighMpccConfig& hc = config.high_mpcc;
    const int n = hc.horizon;
    const Vec3 r0 = sample_position(rng, field, cluttered, hc.clearance_threshold);
    const ReferenceTrajectory ref(random_walk(rng, r0, 8, 0.1, 0.25), 0.4);

    FullState s0;
    s0.position = r0 + uniform_vec(rng, -0.1, 0.1);
    s0.velocity = uniform_vec(rng, -2.0, 2.0);
    s0.acceleration = uniform_vec(rng, -1.0, 1.0);
    s0.theta = uniform(rng, 0.0, 0.5 * ref.domain_end());
    s0.v_theta = uniform(rng, 0.2, 2.0);
    s0.a_theta = uniform(rng, -1.0, 1.0);
    const VecX high_x = random_vec(rng, 4 * n, -3.0, 3.0);

    struct HighTerm {
      TermReport* report;
      HighMpccConfig cfg;
      bool corrupt = false;
    };
    HighTerm high_terms[5] = {{&t_fs, hc}, {&t_fp, hc}, {&t_fe, hc}, {&t_fc, hc}, {&t_fd, hc}};
    for (int i = 0; i < 5; ++i) {
      double* lambdas[5] = {&high_terms[i].cfg.lambda_similarity,
                            &high_terms[i].cfg.lambda_progress,
                            &high_terms[i].cfg.lambda_adaptive,
                            &high_terms[i].cfg.lambda_clearance,
                            &high_terms[i].cfg.lambda_feasibility};
      for (int j = 0; j < 5; ++j)
        if (j != i) *lambdas[j] = 0.0;
    }
    high_terms[0].corrupt = options.inject_sign_flip;
    for (HighTerm& term : high_terms) {
      const HighMpccConfig& cfg = term.cfg;
      const bool corrupt = term.corrupt;
      Objective obj = [&](const VecX& x, VecX& grad) {
        const double cost = high_cost_and_gradient(x, ref, field, s0, cfg, grad);
        if (corrupt) grad = -grad;
        return cost;
      };
      record(*term.report, cluttered,
             check_gradient(obj, high_x, options.fd_step).max_relative_error);
    }
  }

  for (const TermReport& t : out.terms) {
    out.worst_cluttered = std::max(out.worst_cluttered, t.cluttered_error);
    out.worst_open = std::max(out.worst_open, t.open_error);
  }
  return out;
}

}  // namespace ampcc
