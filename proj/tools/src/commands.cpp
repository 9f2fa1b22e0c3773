#include "ietmfc/app/commands.hpp"

#include "ietmfc/app/csv.hpp"
#include "ietmfc/app/svg.hpp"
#include "ietmfc/errors.hpp"
#include "ietmfc/estimation.hpp"
#include "ietmfc/meanfield.hpp"
#include "ietmfc/parallel.hpp"
#include "ietmfc/propagation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#ifndef IETMFC_VERSION
#define IETMFC_VERSION "unknown"
#endif

namespace ietmfc::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTrajectories = "trajectories.csv";
constexpr const char* kMeanfield = "meanfield.csv";
constexpr const char* kEstimates = "estimates.csv";
constexpr const char* kPredictions = "predictions.csv";
constexpr const char* kAgents = "agents.csv";
constexpr const char* kSweep = "estimate_sweep.csv";
constexpr const char* kManifest = "manifest.json";

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }),
          v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

// JSON has no infinities; they are reported as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Eigen::VectorXd row_vector(const CsvTable& t, std::size_t row,
                           const std::vector<std::size_t>& cols) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    v(static_cast<Eigen::Index>(c)) = t.number(row, cols[c]);
  return v;
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw ConfigError("missing manifest: " + (dir / kManifest).string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError((dir / kManifest).string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const RunConfig& config, std::uint64_t seed,
                    std::string_view kind, double seconds,
                    const std::vector<std::string>& files) {
  json m;
  m["kind"] = kind;
  m["scenario_hash"] = scenario_hash(config);
  m["seed"] = seed;
  m["regime"] = std::string(to_string(config.regime));
  m["version"] = IETMFC_VERSION;
  m["duration_s"] = seconds;
  m["outputs"] = files;
  m["config"] = to_json(config);
  write_file_atomic(dir / kManifest, m.dump(2) + "\n");
}

// Largest usable k: windows must all lie in the first control segment.
int first_segment_windows(const RunConfig& config) {
  const auto& g = config.scenario.grid;
  if (config.regime == Regime::iet_dmfc && !g.mod_points.empty()) return g.mod_points.front();
  return g.n_obs;
}

std::vector<int> default_k_list(const RunConfig& config) {
  std::vector<int> ks;
  for (int k = 1; k <= first_segment_windows(config); ++k) ks.push_back(k);
  return ks;
}

void check_k_list(const std::vector<int>& ks, const RunConfig& config) {
  const int limit = first_segment_windows(config);
  for (int k : ks) {
    if (k < 1 || k > limit)
      throw ConfigError("k = " + std::to_string(k) + " outside 1.." + std::to_string(limit) +
                        " (windows of the first control segment)");
  }
}

std::string write_text(const fs::path& dir, const std::string& name, const std::string& body) {
  write_file_atomic(dir / name, body);
  return name;
}

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("IETMFC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  if (text.find_first_not_of(" ") == std::string_view::npos) return out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = text.find(',', pos);
    std::string item(text.substr(pos, comma - pos));
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size())
      throw ConfigError("expected a comma separated list of integers, got '" +
                        std::string(text) + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string estimate_sweep_csv(const FlowSet& flows, double bound,
                               const std::vector<SweepAgent>& agents,
                               const std::vector<int>& k_list, int threads) {
  const long n = flows.params.state_dim();
  const long stride = flows.grid.substeps();
  const int k_max = k_list.empty() ? 0 : *std::max_element(k_list.begin(), k_list.end());
  const KernelSet kernels = build_kernels(flows, 0);

  struct Row {
    EstimationResult est;
    double cr = 0.0;
  };
  std::vector<std::vector<Row>> rows(agents.size(), std::vector<Row>(k_list.size()));
  parallel_for(agents.size(), threads, [&](std::size_t a) {
    const SweepAgent& ag = agents[a];
    if (static_cast<int>(ag.samples.size()) < k_max + 1)
      throw ConfigError("trace of agent " + std::to_string(ag.index) + " has only " +
                        std::to_string(ag.samples.size()) + " samples");
    std::optional<MFPrediction> own_pred;
    std::optional<ControlLaw> own_law;
    if (ag.prediction == nullptr || ag.law == nullptr) {
      own_pred = predict_mf(flows, ag.belief, 0);
      own_law = solve_offset(flows, *own_pred);
    }
    const MFPrediction& pred = own_pred ? *own_pred : *ag.prediction;
    const ControlLaw& law = own_law ? *own_law : *ag.law;
    std::span<const Eigen::VectorXd> obs(ag.samples.data(), static_cast<std::size_t>(k_max) + 1);
    const auto moments = consecutive_windows(flows, kernels, law, pred, obs, 0, stride);
    for (std::size_t j = 0; j < k_list.size(); ++j) {
      const auto k = static_cast<std::size_t>(k_list[j]);
      std::span<const TransitionMoments> mk(moments.data(), k);
      Row& r = rows[a][j];
      r.est = mle_solve(mk, obs.subspan(1, k), bound);
      r.cr = r.est.identifiable ? cramer_rao_floor(r.est.information)
                                : std::numeric_limits<double>::infinity();
    }
  });

  CsvWriter w(concat(concat(concat(concat({"k", "agent_id"}, indexed_columns("Ebar_hat", n)),
                                   indexed_columns("Ei_hat", n)),
                            concat({"identifiable", "clamped"}, indexed_columns("Ebar_true", n))),
                     concat(indexed_columns("Ei_true", n), {"abs_error", "cramer_rao"})));
  for (std::size_t j = 0; j < k_list.size(); ++j) {
    for (std::size_t a = 0; a < agents.size(); ++a) {
      const Row& r = rows[a][j];
      const ErrorVector& truth = agents[a].truth;
      w.cell(k_list[j]).cell(agents[a].index);
      w.cells(r.est.E_hat.mean).cells(r.est.E_hat.priv);
      w.cell(r.est.identifiable ? 1 : 0).cell(r.est.clamped ? 1 : 0);
      w.cells(truth.mean).cells(truth.priv);
      w.cell((r.est.E_hat.stacked() - truth.stacked()).norm()).cell(r.cr);
      w.end_row();
    }
  }
  return w.text();
}

std::vector<std::string> write_run_csvs(const RunConfig& config, const FlowSet& flows,
                                        const PopulationTrace& trace, const fs::path& dir,
                                        const std::vector<int>& k_list, int threads) {
  const Scenario& sc = config.scenario;
  const TimeGrid& grid = sc.grid;
  const long n = flows.params.state_dim();
  std::vector<std::string> files;

  {
    CsvWriter w(concat({"t", "agent_id"}, indexed_columns("x", n)));
    for (const auto& a : trace.agents) {
      for (std::size_t l = 0; l < a.samples.size(); ++l) {
        w.cell(static_cast<double>(l) * grid.dt_obs).cell(a.index).cells(a.samples[l]);
        w.end_row();
      }
    }
    files.push_back(write_text(dir, kTrajectories, w.text()));
  }
  {
    CsvWriter w(concat(concat({"agent_id"}, indexed_columns("x0", n)), indexed_columns("E", n)));
    for (const auto& a : trace.agents) {
      w.cell(a.index).cells(a.x0).cells(a.E_i);
      w.end_row();
    }
    files.push_back(write_text(dir, kAgents, w.text()));
  }
  {
    // The complete-information reference, and the infinite-population mean
    // state under the realised average error of the initial beliefs.
    const MFPrediction reference = predict_mf(flows, sc.init.z0, 0);
    const GridFunction z_actual = trace.regime == Regime::complete
                                      ? reference.z
                                      : actual_mf(flows, sc.init.z0, trace.realized_mean_error);
    CsvWriter w(concat(concat(concat({"t"}, indexed_columns("z_empirical", n)),
                              indexed_columns("z_complete", n)),
                       indexed_columns("z_actual", n)));
    for (int l = 0; l <= grid.n_obs; ++l) {
      const long k = grid.obs_node(l);
      w.cell(static_cast<double>(l) * grid.dt_obs);
      w.cells(trace.empirical_z.at(k)).cells(reference.z.at(k)).cells(z_actual.at(k));
      w.end_row();
    }
    files.push_back(write_text(dir, kMeanfield, w.text()));
  }
  {
    CsvWriter w(concat(
        concat(concat(concat({"segment", "agent_id", "anchor_t", "end_t"},
                             indexed_columns("Ebar_hat", n)),
                      concat(indexed_columns("Ei_hat", n),
                             {"identifiable", "clamped", "condition_number"})),
               concat(indexed_columns("Ebar_true", n), indexed_columns("Ei_true", n))),
        concat(indexed_columns("z_estimate", n), indexed_columns("z_actual", n))));
    const double h = flows.step();
    std::size_t segments = trace.agents.empty() ? 0 : trace.agents.front().segments.size();
    for (std::size_t j = 0; j < segments; ++j) {
      for (const auto& a : trace.agents) {
        const SegmentRecord& s = a.segments[j];
        w.cell(s.segment).cell(a.index);
        w.cell(static_cast<double>(s.anchor_node) * h).cell(static_cast<double>(s.end_node) * h);
        w.cells(s.estimate.E_hat.mean).cells(s.estimate.E_hat.priv);
        w.cell(s.estimate.identifiable ? 1 : 0).cell(s.estimate.clamped ? 1 : 0);
        w.cell(s.estimate.condition_number);
        w.cells(s.true_error.mean).cells(s.true_error.priv);
        w.cells(s.state_estimate).cells(s.actual_state);
        w.end_row();
      }
    }
    files.push_back(write_text(dir, kEstimates, w.text()));
  }
  if (config.outputs.predictions) {
    CsvWriter w(concat({"segment", "agent_id", "t"}, indexed_columns("z", n)));
    for (const auto& a : trace.agents) {
      for (std::size_t j = 0; j < a.predictions.size(); ++j) {
        const PredictionRecord& p = a.predictions[j];
        const long l0 = p.start_node / grid.substeps();
        for (std::size_t l = 0; l < p.z_obs.size(); ++l) {
          w.cell(static_cast<long>(j)).cell(a.index);
          w.cell(static_cast<double>(l0 + static_cast<long>(l)) * grid.dt_obs);
          w.cells(p.z_obs[l]);
          w.end_row();
        }
      }
    }
    files.push_back(write_text(dir, kPredictions, w.text()));
  }
  {
    std::vector<SweepAgent> agents;
    for (const auto& a : trace.agents) {
      SweepAgent s;
      s.index = a.index;
      const bool complete = trace.regime == Regime::complete;
      s.belief = complete ? sc.init.z0 : Eigen::VectorXd(sc.init.z0 + a.E_i);
      s.samples = a.samples;
      s.truth.mean = complete ? Eigen::VectorXd::Zero(n) : trace.realized_mean_error;
      s.truth.priv = complete ? Eigen::VectorXd::Zero(n) : a.E_i;
      if (a.segments.empty()) {
        // No modification happened, so the current law is the initial one.
        s.prediction = &a.prediction;
        s.law = &a.law;
      }
      agents.push_back(std::move(s));
    }
    files.push_back(write_text(
        dir, kSweep, estimate_sweep_csv(flows, sc.errors.bound, agents, k_list, threads)));
  }
  return files;
}

std::vector<std::string> render_charts(const fs::path& dir, std::string_view run_label) {
  std::vector<std::string> files;
  const std::string label(run_label);

  if (fs::exists(dir / kTrajectories)) {
    const CsvTable t = read_csv(dir / kTrajectories);
    const auto xc = t.indexed("x");
    const std::size_t tc = t.column("t"), ac = t.column("agent_id");
    Chart c{"Agent trajectories (" + label + ")", "t", "x", {}};
    std::map<long, std::size_t> series_of;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long id = static_cast<long>(t.number(r, ac));
      auto [it, fresh] = series_of.emplace(id, c.series.size());
      if (fresh) {
        Series s;
        s.color = palette(static_cast<std::size_t>(id));
        s.width = 0.6;
        c.series.push_back(std::move(s));
      }
      c.series[it->second].x.push_back(t.number(r, tc));
      c.series[it->second].y.push_back(t.number(r, xc.at(0)));
    }
    files.push_back(write_text(dir, "trajectories.svg", render_svg(c)));
  }

  if (fs::exists(dir / kMeanfield)) {
    const CsvTable t = read_csv(dir / kMeanfield);
    const std::size_t tc = t.column("t");
    Chart c{"Mean field state (" + label + ")", "t", "z", {}};
    const char* names[] = {"z_empirical", "z_complete", "z_actual"};
    const char* labels[] = {"empirical", "complete information", "actual (infinite N)"};
    for (int s = 0; s < 3; ++s) {
      const auto cols = t.indexed(names[s]);
      for (std::size_t comp = 0; comp < cols.size(); ++comp) {
        Series line;
        line.label = cols.size() > 1 ? std::string(labels[s]) + " [" + std::to_string(comp) + "]"
                                     : labels[s];
        line.color = palette(static_cast<std::size_t>(s) + 3 * comp);
        line.dashed = s == 1;
        line.width = 2.0;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          line.x.push_back(t.number(r, tc));
          line.y.push_back(t.number(r, cols[comp]));
        }
        c.series.push_back(std::move(line));
      }
    }
    files.push_back(write_text(dir, "meanfield.svg", render_svg(c)));
  }

  if (fs::exists(dir / kPredictions) && fs::exists(dir / kMeanfield)) {
    const CsvTable t = read_csv(dir / kPredictions);
    const CsvTable m = read_csv(dir / kMeanfield);
    const std::size_t sc = t.column("segment"), ac = t.column("agent_id"), tc = t.column("t");
    const std::size_t zc = t.indexed("z").at(0);
    Chart c{"Predicted mean field per segment (" + label + ")", "t", "z", {}};
    std::map<std::pair<long, long>, std::size_t> series_of;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long seg = static_cast<long>(t.number(r, sc));
      const long id = static_cast<long>(t.number(r, ac));
      if (id >= 10) continue;  // a handful of agents keeps the chart readable
      auto [it, fresh] = series_of.emplace(std::make_pair(seg, id), c.series.size());
      if (fresh) {
        Series s;
        s.color = palette(static_cast<std::size_t>(seg));
        s.width = 0.8;
        if (id == 0) s.label = "segment " + std::to_string(seg);
        c.series.push_back(std::move(s));
      }
      c.series[it->second].x.push_back(t.number(r, tc));
      c.series[it->second].y.push_back(t.number(r, zc));
    }
    Series ref;
    ref.label = "complete information";
    ref.color = "#000000";
    ref.width = 2.0;
    ref.dashed = true;
    const std::size_t mz = m.indexed("z_complete").at(0);
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      ref.x.push_back(m.number(r, m.column("t")));
      ref.y.push_back(m.number(r, mz));
    }
    c.series.push_back(std::move(ref));
    files.push_back(write_text(dir, "predictions.svg", render_svg(c)));
  }

  if (fs::exists(dir / kSweep)) {
    const CsvTable t = read_csv(dir / kSweep);
    const std::size_t kc = t.column("k"), ac = t.column("agent_id");
    const std::size_t mb = t.indexed("Ebar_hat").at(0), mi = t.indexed("Ei_hat").at(0);
    const std::size_t tb = t.indexed("Ebar_true").at(0), ti = t.indexed("Ei_true").at(0);
    const std::size_t ec = t.column("abs_error"), cc = t.column("cramer_rao");
    Chart cm{"Estimated mean error vs windows (" + label + ")", "k", "Ebar estimate", {}};
    Chart cp{"Private error estimate minus truth (" + label + ")", "k", "Ei estimate - Ei", {}};
    std::map<long, std::size_t> series_of;
    std::map<long, std::vector<double>> err_by_k, cr_by_k;
    Series truth;
    truth.label = "true mean error";
    truth.color = "#000000";
    truth.width = 2.0;
    truth.dashed = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long k = static_cast<long>(t.number(r, kc));
      const long id = static_cast<long>(t.number(r, ac));
      err_by_k[k].push_back(t.number(r, ec));
      cr_by_k[k].push_back(t.number(r, cc));
      if (id == 0) {
        truth.x.push_back(static_cast<double>(k));
        truth.y.push_back(t.number(r, tb));
      }
      if (id >= 20) continue;
      auto [it, fresh] = series_of.emplace(id, cm.series.size());
      if (fresh) {
        Series s;
        s.color = palette(static_cast<std::size_t>(id));
        s.width = 0.8;
        cm.series.push_back(s);
        cp.series.push_back(s);
      }
      cm.series[it->second].x.push_back(static_cast<double>(k));
      cm.series[it->second].y.push_back(t.number(r, mb));
      cp.series[it->second].x.push_back(static_cast<double>(k));
      cp.series[it->second].y.push_back(t.number(r, mi) - t.number(r, ti));
    }
    cm.series.push_back(std::move(truth));
    files.push_back(write_text(dir, "estimate_mean.svg", render_svg(cm)));
    files.push_back(write_text(dir, "estimate_private.svg", render_svg(cp)));

    Chart ce{"Median estimation error vs windows (" + label + ")", "k", "|E estimate - E|", {}};
    Series med{"median |E estimate - E|", {}, {}, palette(0), 2.0, false};
    Series crs{"Cramer-Rao floor (median)", {}, {}, palette(1), 1.5, true};
    for (const auto& [k, errs] : err_by_k) {
      med.x.push_back(static_cast<double>(k));
      med.y.push_back(median(errs));
      crs.x.push_back(static_cast<double>(k));
      crs.y.push_back(median(cr_by_k[k]));
    }
    ce.series = {med, crs};
    files.push_back(write_text(dir, "estimate_error.svg", render_svg(ce)));
  }
  return files;
}

int run_simulation(const RunConfig& config, const fs::path& dir,
                   const std::vector<int>& k_list, int threads, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  const Scenario& sc = config.scenario;
  const FlowSet flows = solve_flowset(sc.params, sc.grid);
  SimulationOptions opt;
  opt.threads = threads;
  opt.record_predictions = config.outputs.predictions;
  const PopulationTrace trace = simulate(sc, config.regime, flows, sc.init.master_seed, opt);

  auto files = write_run_csvs(config, flows, trace, dir, k_list, threads);
  if (config.outputs.charts) {
    auto charts = render_charts(dir, to_string(config.regime));
    files.insert(files.end(), charts.begin(), charts.end());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir, config, sc.init.master_seed, "simulate", seconds, files);
  log << "wrote " << dir.string() << " (" << to_string(config.regime) << ", seed "
      << sc.init.master_seed << ", " << seconds << " s)\n";
  return ExitCode::ok;
}

int cmd_simulate(const SimulateRequest& request, std::ostream& log) {
  RunConfig config = request.config.empty() ? default_config() : load_config(request.config);
  if (request.regime) config.regime = *request.regime;
  if (request.seed) config.scenario.init.master_seed = *request.seed;
  if (request.mod_points) config.scenario.grid.mod_points = *request.mod_points;
  if (request.recenter) config.scenario.init.recenter = *request.recenter;
  if (request.seeds < 1) throw ConfigError("--seeds must be at least 1");
  if (request.out.empty()) throw ConfigError("--out is required");

  const ValidationReport report = validate(config.scenario);
  if (!report.ok()) {
    for (const auto& p : report.problems) log << "config error: " << p << '\n';
    return ExitCode::config_error;
  }
  const std::vector<int> k_list = request.k_list ? *request.k_list : default_k_list(config);
  check_k_list(k_list, config);

  const int threads = worker_threads();
  if (request.seeds == 1) return run_simulation(config, request.out, k_list, threads, log);

  // Seed sweep: independent runs side by side, one thread each.
  const std::uint64_t first = config.scenario.init.master_seed;
  std::vector<std::ostringstream> logs(static_cast<std::size_t>(request.seeds));
  std::vector<int> codes(static_cast<std::size_t>(request.seeds), ExitCode::ok);
  parallel_for(static_cast<std::size_t>(request.seeds), threads, [&](std::size_t s) {
    RunConfig c = config;
    c.scenario.init.master_seed = first + s;
    const fs::path dir = request.out / ("seed_" + std::to_string(first + s));
    try {
      codes[s] = run_simulation(c, dir, k_list, 1, logs[s]);
    } catch (const NumericalError& e) {
      logs[s] << "numerical error (seed " << first + s << "): " << e.what() << '\n';
      codes[s] = ExitCode::numerical_error;
    }
  });
  int code = ExitCode::ok;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    log << logs[s].str();
    code = std::max(code, codes[s]);
  }
  return code;
}

int cmd_estimate(const EstimateRequest& request, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  if (request.out.empty()) throw ConfigError("--out is required");
  if (request.trace.empty()) throw ConfigError("--trace is required");
  const json manifest = read_manifest(request.trace);
  RunConfig config;
  if (!request.config.empty()) {
    config = load_config(request.config);
    // The trace decides which beliefs the agents held.
    if (manifest.contains("regime")) {
      if (auto r = parse_regime(manifest["regime"].get<std::string>())) config.regime = *r;
    }
  } else if (manifest.contains("config")) {
    config = config_from_json(manifest["config"]);
  } else {
    throw ConfigError("no --config given and the trace manifest carries none");
  }
  const ValidationReport report = validate(config.scenario);
  if (!report.ok()) {
    for (const auto& p : report.problems) log << "config error: " << p << '\n';
    return ExitCode::config_error;
  }
  if (request.k_list.empty()) throw ConfigError("--k-list must name at least one k");
  check_k_list(request.k_list, config);

  const Scenario& sc = config.scenario;
  const long n = sc.params.state_dim();
  const CsvTable agents_csv = read_csv(request.trace / kAgents);
  const CsvTable traj = read_csv(request.trace / kTrajectories);
  const auto e_cols = agents_csv.indexed("E");
  const auto x_cols = traj.indexed("x");
  if (static_cast<long>(e_cols.size()) != n || static_cast<long>(x_cols.size()) != n)
    throw ConfigError("trace state dimension does not match the configuration");

  std::map<long, std::size_t> slot;
  std::vector<SweepAgent> agents;
  Eigen::VectorXd mean_error = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < agents_csv.rows.size(); ++r) {
    SweepAgent a;
    a.index = static_cast<int>(agents_csv.number(r, agents_csv.column("agent_id")));
    a.truth.priv = row_vector(agents_csv, r, e_cols);
    mean_error += a.truth.priv;
    slot[a.index] = agents.size();
    agents.push_back(std::move(a));
  }
  if (agents.empty()) throw ConfigError("trace has no agents");
  mean_error /= static_cast<double>(agents.size());
  const bool complete = config.regime == Regime::complete;
  for (auto& a : agents) {
    a.belief = complete ? sc.init.z0 : Eigen::VectorXd(sc.init.z0 + a.truth.priv);
    a.truth.mean = complete ? Eigen::VectorXd::Zero(n) : mean_error;
    if (complete) a.truth.priv = Eigen::VectorXd::Zero(n);
    a.samples.assign(static_cast<std::size_t>(sc.grid.n_obs) + 1,
                     Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN()));
  }
  const std::size_t tc = traj.column("t"), ac = traj.column("agent_id");
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    const long id = static_cast<long>(traj.number(r, ac));
    const double l_real = traj.number(r, tc) / sc.grid.dt_obs;
    const long l = std::lround(l_real);
    if (std::abs(l_real - static_cast<double>(l)) > 1e-6)
      throw ConfigError("trace sample at t = " + traj.rows[r][tc] + " is not on the dt grid");
    auto it = slot.find(id);
    if (it == slot.end() || l < 0 || l > sc.grid.n_obs)
      throw ConfigError("trace row " + std::to_string(r + 1) + " does not fit the scenario");
    agents[it->second].samples[static_cast<std::size_t>(l)] = row_vector(traj, r, x_cols);
  }
  const int k_max = *std::max_element(request.k_list.begin(), request.k_list.end());
  for (const auto& a : agents) {
    for (int l = 0; l <= k_max; ++l) {
      if (!a.samples[static_cast<std::size_t>(l)].allFinite())
        throw ConfigError("trace lacks sample " + std::to_string(l) + " of agent " +
                          std::to_string(a.index));
    }
  }

  fs::create_directories(request.out);
  const FlowSet flows = solve_flowset(sc.params, sc.grid);
  const int threads = worker_threads();
  std::vector<std::string> files{write_text(
      request.out, kSweep,
      estimate_sweep_csv(flows, sc.errors.bound, agents, request.k_list, threads))};
  if (config.outputs.charts) {
    auto charts = render_charts(request.out, to_string(config.regime));
    files.insert(files.end(), charts.begin(), charts.end());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(request.out, config, manifest.value("seed", std::uint64_t{0}), "estimate",
                 seconds, files);
  log << "wrote " << (request.out / kSweep).string() << '\n';
  return ExitCode::ok;
}

int cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out, std::ostream& log) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  if (out.empty()) throw ConfigError("--out is required");

  struct Run {
    fs::path dir;
    json manifest;
    std::string regime;
    std::uint64_t seed = 0;
    std::vector<double> t;
    std::vector<Eigen::VectorXd> z_emp, z_ref;
  };
  std::vector<Run> runs;
  for (const auto& d : run_dirs) {
    Run r;
    r.dir = d;
    r.manifest = read_manifest(d);
    r.regime = r.manifest.value("regime", std::string("unknown"));
    r.seed = r.manifest.value("seed", std::uint64_t{0});
    if (fs::exists(d / kMeanfield)) {
      const CsvTable m = read_csv(d / kMeanfield);
      const auto ce = m.indexed("z_empirical"), cr = m.indexed("z_complete");
      for (std::size_t i = 0; i < m.rows.size(); ++i) {
        r.t.push_back(m.number(i, m.column("t")));
        r.z_emp.push_back(row_vector(m, i, ce));
        r.z_ref.push_back(row_vector(m, i, cr));
      }
    }
    runs.push_back(std::move(r));
  }

  // Trapezoidal L2 distance between two sampled paths on the same times.
  auto l2 = [](const std::vector<double>& t, const std::vector<Eigen::VectorXd>& a,
               const std::vector<Eigen::VectorXd>& b) {
    if (a.size() != b.size() || a.size() != t.size() || a.empty())
      return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
      sum += 0.5 * (t[i] - t[i - 1]) * ((a[i] - b[i]).squaredNorm() + (a[i - 1] - b[i - 1]).squaredNorm());
    return std::sqrt(sum);
  };

  json report;
  report["runs"] = json::array();
  std::map<std::string, std::vector<double>> by_regime;
  std::map<std::uint64_t, std::map<std::string, double>> by_seed;
  for (const auto& r : runs) {
    json entry;
    entry["dir"] = r.dir.string();
    entry["regime"] = r.regime;
    entry["seed"] = r.seed;
    const double d_ref = l2(r.t, r.z_emp, r.z_ref);
    entry["l2_to_reference"] = finite_or_null(d_ref);
    entry["l2_to_complete_run"] = nullptr;
    for (const auto& c : runs) {
      if (c.regime == "complete" && c.seed == r.seed && !c.z_emp.empty()) {
        entry["l2_to_complete_run"] = finite_or_null(l2(r.t, r.z_emp, c.z_emp));
        break;
      }
    }
    if (!r.z_emp.empty()) {
      by_regime[r.regime].push_back(d_ref);
      by_seed[r.seed][r.regime] = d_ref;
    }
    report["runs"].push_back(std::move(entry));
  }
  report["regimes"] = json::object();
  for (const auto& [regime, ds] : by_regime)
    report["regimes"][regime] = {{"runs", ds.size()},
                                 {"median_l2_to_reference", finite_or_null(median(ds))}};
  {
    int compared = 0, better = 0;
    for (const auto& [seed, m] : by_seed) {
      auto e = m.find("erroneous"), i = m.find("iet-dmfc");
      if (e == m.end() || i == m.end()) continue;
      ++compared;
      better += i->second < e->second ? 1 : 0;
    }
    report["iet_dmfc_vs_erroneous"] = {
        {"seeds_compared", compared},
        {"iet_dmfc_closer_fraction",
         compared > 0 ? json(static_cast<double>(better) / compared) : json(nullptr)}};
  }

  // Per-segment medians over every agent of every run.
  std::map<long, std::vector<double>> state_err, est_err;
  std::map<long, double> anchor_t;
  for (const auto& r : runs) {
    if (!fs::exists(r.dir / kEstimates)) continue;
    const CsvTable e = read_csv(r.dir / kEstimates);
    if (e.rows.empty()) continue;
    const auto ze = e.indexed("z_estimate"), za = e.indexed("z_actual");
    const auto hb = e.indexed("Ebar_hat"), hi = e.indexed("Ei_hat");
    const auto tb = e.indexed("Ebar_true"), ti = e.indexed("Ei_true");
    for (std::size_t i = 0; i < e.rows.size(); ++i) {
      const long seg = static_cast<long>(e.number(i, e.column("segment")));
      anchor_t[seg] = e.number(i, e.column("anchor_t"));
      state_err[seg].push_back((row_vector(e, i, ze) - row_vector(e, i, za)).norm());
      const double dm = (row_vector(e, i, hb) - row_vector(e, i, tb)).squaredNorm();
      const double dp = (row_vector(e, i, hi) - row_vector(e, i, ti)).squaredNorm();
      est_err[seg].push_back(std::sqrt(dm + dp));
    }
  }
  report["segments"] = json::array();
  for (const auto& [seg, errs] : state_err) {
    report["segments"].push_back({{"segment", seg},
                                  {"anchor_t", anchor_t[seg]},
                                  {"median_state_error", finite_or_null(median(errs))},
                                  {"median_estimate_error", finite_or_null(median(est_err[seg]))},
                                  {"samples", errs.size()}});
  }

  std::map<long, std::vector<double>> sweep_err, sweep_cr;
  for (const auto& r : runs) {
    if (!fs::exists(r.dir / kSweep)) continue;
    const CsvTable s = read_csv(r.dir / kSweep);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const long k = static_cast<long>(s.number(i, s.column("k")));
      sweep_err[k].push_back(s.number(i, s.column("abs_error")));
      sweep_cr[k].push_back(s.number(i, s.column("cramer_rao")));
    }
  }
  {
    json sweep;
    sweep["k"] = json::array();
    sweep["median_abs_error"] = json::array();
    sweep["median_cramer_rao"] = json::array();
    for (const auto& [k, errs] : sweep_err) {
      sweep["k"].push_back(k);
      sweep["median_abs_error"].push_back(finite_or_null(median(errs)));
      sweep["median_cramer_rao"].push_back(finite_or_null(median(sweep_cr[k])));
    }
    // Adjacent k differ by one window, so the trend is judged on a coarse
    // ladder of k values when the sweep contains it.
    std::vector<long> ladder;
    for (long k : {10L, 25L, 50L, 100L})
      if (sweep_err.count(k)) ladder.push_back(k);
    if (ladder.size() < 2) {
      ladder.clear();
      for (const auto& entry : sweep_err) ladder.push_back(entry.first);
    }
    int inversions = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (long k : ladder) {
      const double m = median(sweep_err[k]);
      if (m > prev) ++inversions;
      prev = m;
    }
    sweep["trend_k"] = ladder;
    sweep["inversions"] = inversions;
    sweep["monotone_trend"] = sweep_err.empty() ? json(nullptr) : json(inversions <= 1);
    report["estimate_sweep"] = std::move(sweep);
  }

  fs::create_directories(out);
  write_file_atomic(out / "report.json", report.dump(2) + "\n");
  log << "wrote " << (out / "report.json").string() << '\n';
  return ExitCode::ok;
}

}  // namespace ietmfc::app
