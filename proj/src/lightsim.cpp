#include "tlcg/lightsim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "tlcg/error.hpp"
#include "tlcg/report.hpp"

namespace tlcg {

void SimConfig::validate() const {
  if (!(length >= 0.0) || !(exit_length >= 0.0)) throw DomainError("edge lengths must be non-negative");
  if (!(speed > 0.0)) throw DomainError("free-flow speed must be positive");
  if (!(arrival_rate > 0.0)) throw DomainError("arrival rate must be positive");
  if (!(saturation > 0.0)) throw DomainError("saturation rate must be positive");
  cycle.validate();
  if (!(horizon > warmup) || warmup < 0.0) throw DomainError("horizon must exceed the warm-up period");
  const double capacity = saturation * cycle.green / cycle.period();
  if (!(arrival_rate < capacity)) {
    std::ostringstream msg;
    msg << "oversaturated: arrivals " << format_number(arrival_rate) << " veh/s >= capacity "
        << format_number(capacity) << " veh/s (saturation " << format_number(saturation) << " x green share "
        << format_number(cycle.green / cycle.period()) << "); the queue grows without bound";
    throw DomainError(msg.str());
  }
}

namespace {

// Earliest t' >= t at which the light is green. Red occupies [0, red) of
// each cycle, shifted by the offset.
double next_green(const LightCycle& cycle, double offset, double t) {
  if (cycle.red <= 0.0) return t;
  const double T = cycle.period();
  const double phase = std::fmod(std::fmod(t + offset, T) + T, T);
  if (phase >= cycle.red) return t;
  return t + (cycle.red - phase);
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
  cfg.validate();
  const double approach = cfg.length / cfg.speed;
  const double exit_time = cfg.exit_length / cfg.speed;
  const double headway = 1.0 / cfg.saturation;

  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> gap(cfg.arrival_rate);

  SimResult out;
  double t = cfg.arrivals == ArrivalProcess::Poisson ? gap(rng) : 0.0;
  double last_release = -std::numeric_limits<double>::infinity();
  while (t < cfg.horizon) {
    VehicleRecord v;
    v.entry = t;
    v.stop_line = t + approach;
    // FIFO: nobody crosses before the previous vehicle plus one headway
    double ready = std::max(v.stop_line, last_release + headway);
    v.release = next_green(cfg.cycle, cfg.cycle_offset, ready);
    last_release = v.release;
    v.exit = v.release + exit_time;
    out.vehicles.push_back(v);
    t += cfg.arrivals == ArrivalProcess::Poisson ? gap(rng) : 1.0 / cfg.arrival_rate;
  }

  out.arrivals = out.vehicles.size();
  double journey = 0.0, wait = 0.0, occupancy = 0.0;
  std::size_t counted = 0;
  for (const auto& v : out.vehicles) {
    if (v.exit <= cfg.horizon) {
      ++out.departed;
    } else {
      ++out.in_system;
    }
    const double lo = std::max(v.entry, cfg.warmup), hi = std::min(v.exit, cfg.horizon);
    if (hi > lo) occupancy += hi - lo;
    if (v.entry >= cfg.warmup) {
      journey += v.journey();
      wait += v.waiting();
      ++counted;
    }
  }
  if (counted > 0) {
    out.mean_journey = journey / static_cast<double>(counted);
    out.mean_wait = wait / static_cast<double>(counted);
  }
  out.mean_x = occupancy / (cfg.horizon - cfg.warmup);
  return out;
}

AffineFit fit_affine(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw DomainError("affine fit needs at least 3 samples");
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : samples) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * n)) throw DomainError("affine fit: no spread in x");
  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : samples) {
    const double r = y - (fit.slope * x + fit.intercept);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("spearman needs two equal-length samples of size >= 2");
  return pearson(average_ranks(a), average_ranks(b));
}

std::vector<GridCell> run_grid(const SimConfig& base, const std::vector<double>& ps,
                               const std::vector<double>& periods) {
  std::vector<std::future<GridCell>> jobs;
  for (double p : ps) {
    for (double T : periods) {
      jobs.push_back(std::async(std::launch::async, [base, p, T] {
        SimConfig cfg = base;
        cfg.cycle = LightCycle::from_proportion(T, p);
        GridCell cell{p, T, cfg.arrival_rate, cfg.seed, {}};
        cell.result = simulate(cfg);
        cell.result.vehicles.clear();  // keep the grid light
        cell.result.vehicles.shrink_to_fit();
        return cell;
      }));
    }
  }
  std::vector<GridCell> out;
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

std::vector<GridCell> default_grid(const SimConfig& base) {
  std::vector<double> ps, periods{40, 60, 80, 100, 120};
  for (int k = 0; k <= 8; ++k) ps.push_back(k / 10.0);
  return run_grid(base, ps, periods);
}

CorrelationReport correlation_report(const std::vector<GridCell>& grid) {
  std::map<double, std::vector<std::size_t>> by_p, by_T;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    by_p[grid[i].p].push_back(i);
    by_T[grid[i].period].push_back(i);
  }
  if (by_p.size() < 2) throw DomainError("correlation needs at least two distinct red proportions");
  if (by_T.size() < 2) throw DomainError("correlation needs at least two distinct cycle lengths");

  std::vector<double> ps, Ts, waits;
  for (const auto& cell : grid) {
    ps.push_back(cell.p);
    Ts.push_back(cell.period);
    waits.push_back(cell.result.mean_wait);
  }
  CorrelationReport report;
  report.cells = grid.size();
  report.rho_p = spearman(ps, waits);
  report.rho_T = spearman(Ts, waits);

  // stratified: average over slices that have any variation
  auto within = [&](const std::map<double, std::vector<std::size_t>>& strata, bool vary_p) {
    double sum = 0.0;
    int used = 0;
    for (const auto& [key, idx] : strata) {
      if (idx.size() < 2) continue;
      std::vector<double> xs, ws;
      for (std::size_t i : idx) {
        xs.push_back(vary_p ? grid[i].p : grid[i].period);
        ws.push_back(grid[i].result.mean_wait);
      }
      const double rho = spearman(xs, ws);
      if (std::isnan(rho)) continue;
      sum += rho;
      ++used;
    }
    return used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
  };
  report.rho_p_within_T = within(by_T, true);
  report.rho_T_within_p = within(by_p, false);
  return report;
}

std::string grid_to_csv(const std::vector<GridCell>& grid) {
  std::ostringstream out;
  out << "p,T,arrival_rate,mean_x,mean_wait,mean_journey,seed\n";
  for (const auto& c : grid) {
    out << format_number(c.p) << ',' << format_number(c.period) << ',' << format_number(c.arrival_rate) << ','
        << format_number(c.result.mean_x) << ',' << format_number(c.result.mean_wait) << ','
        << format_number(c.result.mean_journey) << ',' << c.seed << '\n';
  }
  return out.str();
}

}  // namespace tlcg
