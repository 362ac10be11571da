#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ebl/borell.hpp"

namespace ebl {

inline constexpr double kMaxSimulationHorizon = 0.95;

enum class Scheme { euler_maruyama };

struct SimConfig {
  double dt = 1e-3;
  double t_end = 0.9;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::euler_maruyama;
  /// Pairs paths (2k, 2k+1) on one noise stream with opposite signs; the
  /// standard error is then computed over pair means.
  bool antithetic = false;
};

/// Throws ConfigurationError unless dt > 0, 0 < t_end <= 0.95, t_end + dt < 1
/// and n_paths >= 1 (even when antithetic).
void validate(const SimConfig& cfg);

/// Time grid 0 = t_0 < ... < t_K = t_end with steps dt (the last one may be shorter).
std::vector<double> time_grid(double dt, double t_end);

/// Simulated (X, Y) trajectories with their driving increments.
struct PathEnsemble {
  int dim = 0;
  double rho = 0.0;
  std::size_t n_paths = 0;
  std::vector<double> times;
  /// n_paths x (K+1) x 2n, X components first.
  std::vector<double> states;
  /// n_paths x K x 2n increments (dW, dB).
  std::vector<double> noise;
  /// n_paths x (K+1) trapezoid values of int_0^t |grad u_h(1-s, lambda X + mu Y)|^2 ds.
  std::vector<double> accumulated_kill;

  std::size_t steps() const { return times.size() - 1; }
  double x(std::size_t path, std::size_t k, int i) const { return states[index(path, k) + i]; }
  double y(std::size_t path, std::size_t k, int i) const { return states[index(path, k) + dim + i]; }
  double kill(std::size_t path, std::size_t k) const { return accumulated_kill[path * times.size() + k]; }

 private:
  std::size_t index(std::size_t path, std::size_t k) const { return (path * times.size() + k) * 2 * dim; }
};

/// count draws of the 2n-vector (dW, dB) with per-step covariance dt [[I, rho I], [rho I, I]].
/// Returned row-major, count x 2n. rho = +-1 duplicates or negates the W block exactly.
std::vector<double> correlated_noise(int n, double rho, double dt, std::size_t count, std::uint64_t seed);

/// Euler-Maruyama for d(X,Y) = b(1-t, X, Y) dt + d(W, B), X_0 = Y_0 = 0.
PathEnsemble simulate_paths(const BorellInstance& inst, const SimConfig& cfg);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// E[C(1-t, X_t, Y_t) exp(-1/2 int_0^t |grad u_h(1-s, lambda X_s + mu Y_s)|^2 ds)],
/// streamed over paths (nothing stored). Requires t <= cfg.t_end.
MonteCarloEstimate feynman_kac_estimate(const BorellInstance& inst, double t, const SimConfig& cfg);

struct SupportDiagnostics {
  double diag_spread = 0.0;          // sd across paths of X - Y at t_end (Euclidean over coordinates)
  double max_abs_diagonal = 0.0;     // max over paths, times and coordinates of |X - Y|
  double max_diagonal_sd = 0.0;      // max over grid times of the across-path sd of X - Y
  std::optional<double> coverage;    // n = 1 only: Gaussian-mass-weighted occupancy of [-3,3]^2
};

/// Heuristic support evidence; `cells` is the number of histogram cells per axis.
SupportDiagnostics support_diagnostics(const PathEnsemble& ens, int cells = 12);

/// (d/dx + d/dy)(b_1 - b_2) at b(1-t, x, y), central differences along (1,1). n = 1 only.
double lie_bracket_gap(const BorellInstance& inst, double t, double x, double y, double h = 1e-4);

struct MinimizerResiduals {
  double dc_dx = 0.0;
  double dc_dy = 0.0;
  double xx_minus_yy = 0.0;
  double xx_plus_xy = 0.0;
  double max_abs() const;
};

/// Finite-difference residuals of the four minimizer identities of C(1-t, ., .). n = 1 only.
MinimizerResiduals minimizer_identities_check(const BorellInstance& inst, double t, double x, double y,
                                              double dx = 1e-3);

enum class DegenerateVerdict { d1, d2, both, neither };
const char* to_string(DegenerateVerdict v);

struct D1D2Report {
  DegenerateVerdict verdict = DegenerateVerdict::neither;
  double d1_residual = 0.0;  // |u_f(1-t,x) - u_g(1-t,y)|
  double d2_residual = 0.0;  // max |u''| over h, f, g
};

/// (D1)/(D2) at time 1-t. Requires n = 1 and lambda + mu = 1 (RegimeError otherwise).
D1D2Report d1_d2_check(const BorellInstance& inst, double t, double x, double y, double tol = 1e-6);

/// Max |X_full - X_reduced| over paths and times, where the reduced 1-D SDE
/// dX = -u_f(1-t,X) u_f'(1-t,X) dt + dW is driven by stream `reduced_seed`
/// (defaults to cfg.seed, i.e. the same noise). Requires f = g = h and lambda + mu = 1.
double diagonal_sde_check(const BorellInstance& inst, const SimConfig& cfg,
                          std::optional<std::uint64_t> reduced_seed = std::nullopt);

}  // namespace ebl
