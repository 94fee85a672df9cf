#include <algorithm>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "execq/error.hpp"
#include "execq/parallel.hpp"

namespace execq {
namespace {

struct GridAxes {
  GridSpec spec;
  std::vector<double> price_levels;
  std::vector<double> qv_levels;
  std::vector<int> inventories;
  std::size_t cell_count = 0;
};

GridAxes grid_axes(const ModelContext& ctx, const GridSpec& requested) {
  GridAxes ax;
  ax.spec = effective_grid(requested, ctx.feature_set);
  ax.price_levels = ax.spec.price_buckets == 1 ? std::vector<double>{0.0} : bucket_levels(ax.spec.price_buckets);
  ax.qv_levels = ax.spec.qv_buckets == 1 ? std::vector<double>{0.0} : bucket_levels(ax.spec.qv_buckets);
  for (int q = ctx.env.lot_multiple; q <= ctx.env.q0; q += ctx.env.lot_multiple) ax.inventories.push_back(q);
  ax.cell_count = ax.price_levels.size() * ax.qv_levels.size() * static_cast<std::size_t>(ctx.env.periods) *
                  ax.inventories.size();
  return ax;
}

PolicyCell grid_cell(const QNetworkParams& params, const ModelContext& ctx, const GridAxes& ax, std::size_t index) {
  const std::size_t nq = ax.inventories.size();
  const std::size_t nk = static_cast<std::size_t>(ctx.env.periods);
  const std::size_t nv = ax.qv_levels.size();
  PolicyCell c;
  c.q = ax.inventories[index % nq];
  index /= nq;
  c.k = static_cast<int>(index % nk);
  index /= nk;
  c.qv_bucket = static_cast<int>(index % nv);
  c.price_bucket = static_cast<int>(index / nv);
  const RawState s = grid_state(c.k, c.q, ax.price_levels[static_cast<std::size_t>(c.price_bucket)],
                                ax.qv_levels[static_cast<std::size_t>(c.qv_bucket)], ctx);
  c.action = select_greedy(params, s, ctx);
  return c;
}

struct PnlPair {
  double model = 0.0;
  double twap = 0.0;
};

std::vector<HourResult> finish_results(std::span<const EpisodeWindow> windows, std::span<const PnlPair> pnl) {
  std::vector<HourResult> rows;
  rows.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    HourResult r;
    r.date = windows[i].date;
    r.hour = windows[i].hour_label;
    r.model_pnl = pnl[i].model;
    r.twap_pnl = pnl[i].twap;
    r.delta_bps = delta_pnl(r.model_pnl, r.twap_pnl);
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const HourResult& a, const HourResult& b) {
    return a.date != b.date ? a.date < b.date : a.hour < b.hour;
  });
  return rows;
}

}  // namespace

namespace serial {

PolicyGrid extract_policy_grid(const QNetworkParams& params, const ModelContext& ctx, const GridSpec& spec) {
  const GridAxes ax = grid_axes(ctx, spec);
  PolicyGrid grid{ax.price_levels, ax.qv_levels, {}};
  grid.cells.reserve(ax.cell_count);
  for (std::size_t i = 0; i < ax.cell_count; ++i) grid.cells.push_back(grid_cell(params, ctx, ax, i));
  return grid;
}

std::vector<HourResult> evaluate_windows(const ActionSource& model, const ActionSource& baseline,
                                         std::span<const EpisodeWindow> windows, const EnvConfig& env) {
  std::vector<PnlPair> pnl(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    pnl[i].model = run_policy(model, windows[i], env).pnl;
    pnl[i].twap = run_policy(baseline, windows[i], env).pnl;
  }
  return finish_results(windows, pnl);
}

}  // namespace serial

PolicyGrid extract_policy_grid(const QNetworkParams& params, const ModelContext& ctx, const GridSpec& spec,
                               Execution exec) {
  if (exec == Execution::serial) return serial::extract_policy_grid(params, ctx, spec);
  const GridAxes ax = grid_axes(ctx, spec);
  PolicyGrid grid{ax.price_levels, ax.qv_levels, std::vector<PolicyCell>(ax.cell_count)};
  const auto n = static_cast<std::ptrdiff_t>(ax.cell_count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    grid.cells[static_cast<std::size_t>(i)] = grid_cell(params, ctx, ax, static_cast<std::size_t>(i));
  return grid;
}

std::vector<HourResult> evaluate_windows(const ActionSource& model, const ActionSource& baseline,
                                         std::span<const EpisodeWindow> windows, const EnvConfig& env,
                                         Execution exec) {
  if (exec == Execution::serial) return serial::evaluate_windows(model, baseline, windows, env);
  std::vector<PnlPair> pnl(windows.size());
  std::vector<std::exception_ptr> errors(windows.size());
  const auto n = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      pnl[u].model = run_policy(model, windows[u], env).pnl;
      pnl[u].twap = run_policy(baseline, windows[u], env).pnl;
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return finish_results(windows, pnl);
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace execq
