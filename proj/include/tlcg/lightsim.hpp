#pragma once

// Fixed-cycle signal on a single approach, point-queue physics. Vehicles drive
// the approach at free-flow speed, stack vertically at the stop line and leave
// at the saturation rate while the light shows green.

#include <cstdint>
#include <string>
#include <vector>

#include "tlcg/costs.hpp"

namespace tlcg {

enum class ArrivalProcess { Deterministic, Poisson };

struct SimConfig {
  double length = 500.0;       // approach, m
  double exit_length = 50.0;   // downstream edge, m
  double speed = 12.5;         // m/s
  ArrivalProcess arrivals = ArrivalProcess::Deterministic;
  double arrival_rate = 0.045;  // veh/s
  double saturation = 0.5;      // veh/s during green
  LightCycle cycle{20.0, 20.0};
  double cycle_offset = 0.0;  // where in the cycle t = 0 falls, s
  double horizon = 20000.0;
  double warmup = 0.0;
  std::uint64_t seed = 1;

  double free_flow_time() const { return (length + exit_length) / speed; }
  /// Throws DomainError; oversaturation gets its own message.
  void validate() const;
};

struct VehicleRecord {
  double entry = 0.0;     // enters the approach
  double stop_line = 0.0; // reaches the stop line
  double release = 0.0;   // crosses the stop line
  double exit = 0.0;      // leaves the exit edge

  double waiting() const { return release - stop_line; }
  double journey() const { return exit - entry; }
};

struct SimResult {
  double mean_journey = 0.0;
  double mean_wait = 0.0;
  double mean_x = 0.0;  // time-averaged vehicles on approach + exit edge
  std::size_t arrivals = 0;
  std::size_t departed = 0;   // exited by the horizon
  std::size_t in_system = 0;  // still inside at the horizon
  std::vector<VehicleRecord> vehicles;  // everything that entered before the horizon
};

SimResult simulate(const SimConfig& cfg);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of journey on x. Needs >= 3 samples with spread in x.
AffineFit fit_affine(const std::vector<std::pair<double, double>>& samples);

/// Spearman rank correlation, ties get average ranks. NaN when one side is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct GridCell {
  double p = 0.0;
  double period = 0.0;
  double arrival_rate = 0.0;
  std::uint64_t seed = 0;
  SimResult result;
};

/// Runs every (p, T) cell on the template config, concurrently.
std::vector<GridCell> run_grid(const SimConfig& base, const std::vector<double>& ps, const std::vector<double>& periods);

/// p in {0, 0.1, ..., 0.8} x T in {40, 60, ..., 120}.
std::vector<GridCell> default_grid(const SimConfig& base = {});

struct CorrelationReport {
  double rho_p = 0.0;  // pooled over the grid
  double rho_T = 0.0;
  double rho_p_within_T = 0.0;  // mean over fixed-T columns
  double rho_T_within_p = 0.0;  // mean over fixed-p rows with red time
  std::size_t cells = 0;
};

/// Throws DomainError with fewer than two distinct p or T values.
CorrelationReport correlation_report(const std::vector<GridCell>& grid);

/// Columns `p,T,arrival_rate,mean_x,mean_wait,mean_journey,seed`.
std::string grid_to_csv(const std::vector<GridCell>& grid);

}  // namespace tlcg
