#include "ietmfc/population.hpp"

#include "ietmfc/errors.hpp"
#include "ietmfc/parallel.hpp"
#include "ietmfc/propagation.hpp"
#include "ietmfc/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ietmfc {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric square root; tolerates positive semidefinite input.
Matrix psd_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Vector standard_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

void recenter(std::vector<Vector>& xs, const Vector& target) {
  Vector mean = Vector::Zero(target.size());
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  const Vector shift = target - mean;
  for (auto& x : xs) x += shift;
}

Vector mean_of(const std::vector<Vector>& xs) {
  Vector mean = Vector::Zero(xs.front().size());
  for (const auto& x : xs) mean += x;
  return mean / static_cast<double>(xs.size());
}

PredictionRecord record_prediction(const MFPrediction& pred, const TimeGrid& grid) {
  PredictionRecord rec;
  rec.start_node = pred.start_node;
  for (int l = 0; l <= grid.n_obs; ++l) {
    const long node = grid.obs_node(l);
    if (node >= pred.start_node) rec.z_obs.push_back(pred.z.at(node));
  }
  return rec;
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::complete:
      return "complete";
    case Regime::erroneous:
      return "erroneous";
    case Regime::iet_dmfc:
      return "iet-dmfc";
  }
  return "unknown";
}

std::optional<Regime> parse_regime(std::string_view text) {
  if (text == "complete") return Regime::complete;
  if (text == "erroneous") return Regime::erroneous;
  if (text == "iet-dmfc" || text == "iet_dmfc") return Regime::iet_dmfc;
  return std::nullopt;
}

PopulationDraw sample_population(const InitSpec& init, const ErrorSpec& err,
                                 std::uint64_t seed) {
  const auto N = static_cast<std::size_t>(init.N);
  const Matrix lx = psd_sqrt(init.init_covariance);
  const Matrix le = psd_sqrt(err.private_variance);
  PopulationDraw draw;
  draw.x0.reserve(N);
  draw.errors.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto rx = substream(seed, i, Stream::initial_state);
    auto re = substream(seed, i, Stream::initial_error);
    draw.x0.push_back(init.z0 + lx * standard_normal(rx, init.z0.size()));
    draw.errors.push_back(err.mean_error + le * standard_normal(re, err.mean_error.size()));
  }
  if (init.recenter) {
    recenter(draw.x0, init.z0);
    recenter(draw.errors, err.mean_error);
  }
  return draw;
}

PopulationTrace simulate(const Scenario& sc, Regime regime, const FlowSet& fs,
                         std::uint64_t seed, const SimulationOptions& opt) {
  const SystemParams& p = fs.params;
  const TimeGrid& grid = sc.grid;
  if (grid.substeps() != fs.grid.substeps() || grid.n_obs != fs.grid.n_obs ||
      grid.dt_obs != fs.grid.dt_obs) {
    throw std::invalid_argument("simulate: scenario grid differs from the flows' grid");
  }
  const Eigen::Index n = p.state_dim();
  const long last = grid.last_node();
  const int substeps = grid.substeps();
  const double h = grid.step();
  const int rho = std::max(1, opt.noise_refinement);
  const double noise_scale = std::sqrt(h / rho);

  const PopulationDraw draw = sample_population(sc.init, sc.errors, seed);
  const std::size_t N = draw.x0.size();

  PopulationTrace trace;
  trace.regime = regime;
  trace.realized_mean_error = mean_of(draw.errors);

  // Segment j runs from mod index k_j to k_{j+1}; k_0 = 0.
  std::vector<int> seg_start{0};
  if (regime == Regime::iet_dmfc) {
    for (int k : grid.mod_points) {
      seg_start.push_back(k);
      trace.modification_nodes.push_back(grid.obs_node(k));
    }
  }
  std::vector<KernelSet> kernels;
  if (regime == Regime::iet_dmfc) {
    for (std::size_t j = 0; j + 1 < seg_start.size(); ++j) {
      kernels.push_back(build_kernels(fs, grid.obs_node(seg_start[j])));
    }
  }

  trace.agents.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    AgentRecord& a = trace.agents[i];
    a.index = static_cast<int>(i);
    a.x0 = draw.x0[i];
    a.E_i = draw.errors[i];
    a.samples.reserve(static_cast<std::size_t>(grid.n_obs) + 1);
  }

  if (regime == Regime::complete) {
    MFPrediction pred = predict_mf(fs, sc.init.z0, 0);
    ControlLaw law = solve_offset(fs, pred);
    for (auto& a : trace.agents) {
      a.prediction = pred;
      a.law = law;
    }
  } else {
    parallel_for(N, opt.threads, [&](std::size_t i) {
      AgentRecord& a = trace.agents[i];
      a.prediction = predict_mf(fs, sc.init.z0 + a.E_i, 0);
      a.law = solve_offset(fs, a.prediction);
    });
  }
  if (opt.record_predictions) {
    for (auto& a : trace.agents) a.predictions.push_back(record_prediction(a.prediction, grid));
  }

  std::vector<Vector> x = draw.x0;
  std::vector<Vector> u(N);
  std::vector<std::mt19937_64> noise;
  noise.reserve(N);
  for (std::size_t i = 0; i < N; ++i) noise.push_back(substream(seed, i, Stream::brownian));

  std::vector<Matrix> zs(static_cast<std::size_t>(last + 1));
  std::vector<Matrix> us(static_cast<std::size_t>(last + 1));
  std::size_t next_segment = 1;  // index into seg_start of the next modification

  for (long k = 0; k <= last; ++k) {
    const Vector z = mean_of(x);
    if (!z.allFinite()) {
      throw NonFiniteBlowup("population state became non-finite at t = " +
                            std::to_string(static_cast<double>(k) * h));
    }
    if (k % substeps == 0) {
      for (std::size_t i = 0; i < N; ++i) trace.agents[i].samples.push_back(x[i]);
    }

    if (next_segment < seg_start.size() && k == grid.obs_node(seg_start[next_segment])) {
      const std::size_t j = next_segment - 1;
      const int l0 = seg_start[j];
      const int l1 = seg_start[next_segment];
      const KernelSet& ks = kernels[j];
      parallel_for(N, opt.threads, [&](std::size_t i) {
        AgentRecord& a = trace.agents[i];
        std::span<const Vector> seg(a.samples.data() + l0,
                                    static_cast<std::size_t>(l1 - l0 + 1));
        const auto moments = consecutive_windows(fs, ks, a.law, a.prediction, seg,
                                                 grid.obs_node(l0), substeps);
        SegmentRecord rec;
        rec.segment = static_cast<int>(j);
        rec.anchor_node = grid.obs_node(l0);
        rec.end_node = k;
        rec.estimate = mle_solve(moments, seg.subspan(1), sc.errors.bound);
        rec.applied = rec.estimate.identifiable ? rec.estimate.E_hat : ErrorVector::zero(n);
        rec.state_estimate = estimate_state(ks, a.prediction, rec.applied, k);
        rec.actual_state = z;
        if (k < last) {
          a.prediction = predict_mf(fs, rec.state_estimate, k);
          a.law = solve_offset(fs, a.prediction);
        }
        a.segments.push_back(std::move(rec));
      });
      if (opt.record_predictions && k < last) {
        for (auto& a : trace.agents) {
          a.predictions.push_back(record_prediction(a.prediction, grid));
        }
      }
      ++next_segment;
    }

    for (std::size_t i = 0; i < N; ++i) u[i] = trace.agents[i].law.feedback(x[i], k);
    const Vector ubar = mean_of(u);
    zs[static_cast<std::size_t>(k)] = z;
    us[static_cast<std::size_t>(k)] = ubar;
    if (k == last) break;

    const Vector common = p.C * z + p.F * ubar;
    for (std::size_t i = 0; i < N; ++i) {
      Vector xi = Vector::Zero(p.D.cols());
      for (int r = 0; r < rho; ++r) xi += standard_normal(noise[i], p.D.cols());
      x[i] += h * (p.A * x[i] + p.B * u[i] + common) + noise_scale * (p.D * xi);
    }
  }

  // Diagnostic segment errors: initial errors for the first segment, then the
  // gap between each agent's corrected state and the realised mean state.
  for (auto& a : trace.agents) {
    for (std::size_t j = 0; j < a.segments.size(); ++j) {
      a.segments[j].true_error.priv =
          (j == 0) ? Vector(a.E_i)
                   : Vector(a.segments[j - 1].state_estimate - a.segments[j - 1].actual_state);
    }
  }
  for (std::size_t j = 0; j + 1 < seg_start.size(); ++j) {
    Vector mean = Vector::Zero(n);
    for (const auto& a : trace.agents) mean += a.segments[j].true_error.priv;
    mean /= static_cast<double>(N);
    for (auto& a : trace.agents) a.segments[j].true_error.mean = mean;
  }

  trace.empirical_z = GridFunction(h, 0, std::move(zs));
  trace.empirical_ubar = GridFunction(h, 0, std::move(us));
  return trace;
}

double l2_distance(const GridFunction& a, const GridFunction& b) {
  const long first = std::max(a.first_node(), b.first_node());
  const long last = std::min(a.last_node(), b.last_node());
  if (last <= first) return 0.0;
  const double h = a.step();
  double acc = 0.0;
  for (long k = first; k <= last; ++k) {
    const double w = (k == first || k == last) ? 0.5 * h : h;
    acc += w * (a.at(k) - b.at(k)).squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace ietmfc
