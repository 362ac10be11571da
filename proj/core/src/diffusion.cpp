#include "ebl/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "ebl/errors.hpp"
#include "ebl/random.hpp"

namespace ebl {

namespace {

// Splits [0, n) into contiguous blocks, one per worker. Each index writes
// only its own output slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, std::max<std::size_t>(1, n / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block, hi = std::min(n, lo + block);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

// Increments (dW, dB) for one path; antithetic partners share a stream.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream, double sign) : rng_(seed, stream), sign_(sign) {}

  void draw(int n, double rho, double sqrt_dt, std::span<double> out) {
    for (int i = 0; i < n; ++i) {
      const double w = sign_ * normal_(rng_);
      out[i] = sqrt_dt * w;
      if (rho == 1.0) {
        out[n + i] = out[i];
      } else if (rho == -1.0) {
        out[n + i] = -out[i];
      } else {
        const double z = sign_ * normal_(rng_);
        out[n + i] = sqrt_dt * (rho * w + std::sqrt(1.0 - rho * rho) * z);
      }
    }
  }

 private:
  CounterRng rng_;
  std::normal_distribution<double> normal_;
  double sign_;
};

NoiseSource noise_for_path(const SimConfig& cfg, std::size_t path) {
  if (cfg.antithetic) return NoiseSource(cfg.seed, path / 2, path % 2 == 0 ? 1.0 : -1.0);
  return NoiseSource(cfg.seed, path, 1.0);
}

struct DriftWorkspace {
  DriftWorkspace(const BorellInstance& inst)
      : z(inst.dim()), gh(inst.dim()), gf(inst.dim()), gg(inst.dim()),
        f_is_h(inst.f() == inst.h()), g_is_h(inst.g() == inst.h()), g_is_f(inst.g() == inst.f()) {}
  Vector z, gh, gf, gg;
  // Structural coincidences used to skip repeated heat evaluations at equal points.
  bool f_is_h, g_is_h, g_is_f;
};

bool same_point(std::span<const double> a, std::span<const double> b) { return std::equal(a.begin(), a.end(), b.begin()); }

// Writes b(s, x, y) into b (2n entries); returns |grad u_h(s, lambda x + mu y)|^2.
double drift_into(const BorellInstance& inst, double s, std::span<const double> x, std::span<const double> y,
                  std::span<double> b, DriftWorkspace& w) {
  const int n = inst.dim();
  for (int i = 0; i < n; ++i) w.z[i] = inst.lambda() * x[i] + inst.mu() * y[i];
  const double uh = u_value_and_grad(inst.h(), s, w.z, w.gh);
  double uf = 0.0, ug = 0.0;
  if (w.f_is_h && same_point(x, w.z)) {
    uf = uh;
    std::copy(w.gh.begin(), w.gh.end(), w.gf.begin());
  } else {
    uf = u_value_and_grad(inst.f(), s, x, w.gf);
  }
  if (w.g_is_f && same_point(y, x)) {
    ug = uf;
    std::copy(w.gf.begin(), w.gf.end(), w.gg.begin());
  } else if (w.g_is_h && same_point(y, w.z)) {
    ug = uh;
    std::copy(w.gh.begin(), w.gh.end(), w.gg.begin());
  } else {
    ug = u_value_and_grad(inst.g(), s, y, w.gg);
  }
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    b[i] = -0.5 * uf * (w.gh[i] + w.gf[i]);
    b[n + i] = -0.5 * ug * (w.gh[i] + w.gg[i]);
    norm2 += w.gh[i] * w.gh[i];
  }
  return norm2;
}

double kill_rate(const BorellInstance& inst, double s, std::span<const double> state, DriftWorkspace& w) {
  const int n = inst.dim();
  for (int i = 0; i < n; ++i) w.z[i] = inst.lambda() * state[i] + inst.mu() * state[n + i];
  u_value_and_grad(inst.h(), s, w.z, w.gh);
  double norm2 = 0.0;
  for (double v : w.gh) norm2 += v * v;
  return norm2;
}

// Optional per-path outputs of run_path.
struct PathRecord {
  double* states = nullptr;  // (K+1) x 2n
  double* noise = nullptr;   // K x 2n
  double* kill = nullptr;    // K+1
};

struct PathEnd {
  Vector state;
  double kill = 0.0;
};

PathEnd run_path(const BorellInstance& inst, const SimConfig& cfg, const std::vector<double>& times,
                 std::size_t path, PathRecord rec) {
  const int n = inst.dim();
  const std::size_t K = times.size() - 1;
  NoiseSource noise = noise_for_path(cfg, path);
  DriftWorkspace work(inst);
  Vector state(2 * n, 0.0), b(2 * n), dw(2 * n);
  const std::span<const double> xs(state.data(), n), ys(state.data() + n, n);
  double kill = 0.0;
  if (rec.states) std::copy(state.begin(), state.end(), rec.states);
  if (rec.kill) rec.kill[0] = 0.0;
  // The kill rate at t_{k+1} is a by-product of the drift evaluated there.
  double rate = K > 0 ? drift_into(inst, 1.0 - times[0], xs, ys, b, work) : 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double step = times[k + 1] - times[k];
    noise.draw(n, inst.rho(), std::sqrt(step), dw);
    for (int i = 0; i < 2 * n; ++i) state[i] += b[i] * step + dw[i];
    const double next_rate = k + 1 < K ? drift_into(inst, 1.0 - times[k + 1], xs, ys, b, work)
                                       : kill_rate(inst, 1.0 - times[k + 1], state, work);
    kill += 0.5 * (rate + next_rate) * step;
    rate = next_rate;
    if (rec.states) std::copy(state.begin(), state.end(), rec.states + (k + 1) * 2 * n);
    if (rec.noise) std::copy(dw.begin(), dw.end(), rec.noise + k * 2 * n);
    if (rec.kill) rec.kill[k + 1] = kill;
  }
  return {std::move(state), kill};
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void require_one_dimensional(const BorellInstance& inst, const char* what) {
  if (inst.dim() != 1) throw UnsupportedError(std::string(what) + ": only n = 1 is supported");
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigurationError("sim.dt must be positive");
  if (!(cfg.t_end > 0.0) || cfg.t_end > kMaxSimulationHorizon) {
    throw ConfigurationError("sim.t_end must lie in (0, 0.95]");
  }
  if (!(cfg.t_end + cfg.dt < 1.0)) throw ConfigurationError("sim.t_end + sim.dt must be below 1");
  if (cfg.n_paths < 1) throw ConfigurationError("sim.n_paths must be at least 1");
}

std::vector<double> time_grid(double dt, double t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigurationError("time_grid: dt and t_end must be positive");
  const auto K = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<double> times(K + 1);
  for (std::size_t k = 0; k < K; ++k) times[k] = static_cast<double>(k) * dt;
  times[K] = t_end;
  return times;
}

std::vector<double> correlated_noise(int n, double rho, double dt, std::size_t count, std::uint64_t seed) {
  if (n < 1) throw DomainError("correlated_noise: dimension must be positive");
  if (!(std::fabs(rho) <= 1.0)) throw DomainError("correlated_noise: |rho| must not exceed 1");
  if (!(dt > 0.0)) throw DomainError("correlated_noise: dt must be positive");
  std::vector<double> out(count * 2 * n);
  NoiseSource source(seed, 0, 1.0);
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t c = 0; c < count; ++c) {
    source.draw(n, rho, sqrt_dt, std::span<double>(out.data() + c * 2 * n, 2 * n));
  }
  return out;
}

PathEnsemble simulate_paths(const BorellInstance& inst, const SimConfig& cfg) {
  validate(cfg);
  const int n = inst.dim();
  PathEnsemble ens;
  ens.dim = n;
  ens.rho = inst.rho();
  ens.n_paths = cfg.n_paths;
  ens.times = time_grid(cfg.dt, cfg.t_end);
  const std::size_t K = ens.steps();
  ens.states.assign(cfg.n_paths * (K + 1) * 2 * n, 0.0);
  ens.noise.assign(cfg.n_paths * K * 2 * n, 0.0);
  ens.accumulated_kill.assign(cfg.n_paths * (K + 1), 0.0);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    run_path(inst, cfg, ens.times, p,
             {ens.states.data() + p * (K + 1) * 2 * n, ens.noise.data() + p * K * 2 * n,
              ens.accumulated_kill.data() + p * (K + 1)});
  });
  return ens;
}

MonteCarloEstimate feynman_kac_estimate(const BorellInstance& inst, double t, const SimConfig& cfg) {
  validate(cfg);
  if (!(t > 0.0) || t > cfg.t_end) throw DomainError("feynman_kac_estimate: t must lie in (0, t_end]");
  const int n = inst.dim();
  const auto times = time_grid(cfg.dt, t);
  std::vector<double> values(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    const PathEnd end = run_path(inst, cfg, times, p, {});
    const std::span<const double> x(end.state.data(), n), y(end.state.data() + n, n);
    // log-space discount, exponentiated once per path.
    values[p] = c_value(inst, 1.0 - t, x, y) * std::exp(-0.5 * end.kill);
  });
  std::vector<double> samples;
  if (cfg.antithetic) {
    for (std::size_t p = 0; p + 1 < values.size(); p += 2) samples.push_back(0.5 * (values[p] + values[p + 1]));
    if (values.size() % 2 == 1) samples.push_back(values.back());
  } else {
    samples = std::move(values);
  }
  MonteCarloEstimate est;
  est.samples = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  est.mean = sum / static_cast<double>(samples.size());
  est.std_error = sd_of(samples) / std::sqrt(static_cast<double>(samples.size()));
  return est;
}

SupportDiagnostics support_diagnostics(const PathEnsemble& ens, int cells) {
  if (cells < 1) throw ConfigurationError("support_diagnostics: cells must be positive");
  SupportDiagnostics d;
  const std::size_t P = ens.n_paths, K = ens.steps();
  if (P == 0 || ens.dim == 0) return d;
  std::vector<double> diff(P);
  for (std::size_t k = 0; k <= K; ++k) {
    double var_sum = 0.0;
    for (int i = 0; i < ens.dim; ++i) {
      for (std::size_t p = 0; p < P; ++p) {
        diff[p] = ens.x(p, k, i) - ens.y(p, k, i);
        d.max_abs_diagonal = std::max(d.max_abs_diagonal, std::fabs(diff[p]));
      }
      const double sd = sd_of(diff);
      var_sum += sd * sd;
    }
    const double spread = std::sqrt(var_sum);
    d.max_diagonal_sd = std::max(d.max_diagonal_sd, spread);
    if (k == K) d.diag_spread = spread;
  }
  if (ens.dim == 1) {
    const double lo = -3.0, width = 6.0 / cells;
    std::vector<double> mass(cells);
    for (int c = 0; c < cells; ++c) mass[c] = std_normal_interval_mass(lo + c * width, lo + (c + 1) * width);
    std::vector<char> occupied(static_cast<std::size_t>(cells) * cells, 0);
    for (std::size_t p = 0; p < P; ++p) {
      const int cx = static_cast<int>(std::floor((ens.x(p, K, 0) - lo) / width));
      const int cy = static_cast<int>(std::floor((ens.y(p, K, 0) - lo) / width));
      if (cx >= 0 && cx < cells && cy >= 0 && cy < cells) occupied[static_cast<std::size_t>(cx) * cells + cy] = 1;
    }
    double covered = 0.0, total = 0.0;
    for (int a = 0; a < cells; ++a) {
      for (int b = 0; b < cells; ++b) {
        const double w = mass[a] * mass[b];
        total += w;
        if (occupied[static_cast<std::size_t>(a) * cells + b]) covered += w;
      }
    }
    d.coverage = covered / total;
  }
  return d;
}

double lie_bracket_gap(const BorellInstance& inst, double t, double x, double y, double h) {
  require_one_dimensional(inst, "lie_bracket_gap");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("lie_bracket_gap: t must lie in (0,1)");
  if (!(h > 0.0)) throw ConfigurationError("lie_bracket_gap: step must be positive");
  const auto gap = [&](double xx, double yy) {
    const double px[1] = {xx}, py[1] = {yy};
    const Drift b = drift_b(inst, 1.0 - t, px, py);
    return b.b1[0] - b.b2[0];
  };
  return (gap(x + h, y + h) - gap(x - h, y - h)) / (2.0 * h);
}

double MinimizerResiduals::max_abs() const {
  return std::max({std::fabs(dc_dx), std::fabs(dc_dy), std::fabs(xx_minus_yy), std::fabs(xx_plus_xy)});
}

MinimizerResiduals minimizer_identities_check(const BorellInstance& inst, double t, double x, double y,
                                              double dx) {
  require_one_dimensional(inst, "minimizer_identities_check");
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("minimizer_identities_check: t must lie in [0,1)");
  if (!(dx > 0.0)) throw ConfigurationError("minimizer_identities_check: step must be positive");
  const double s = 1.0 - t;
  const auto C = [&](double xx, double yy) {
    const double px[1] = {xx}, py[1] = {yy};
    return c_value(inst, s, px, py);
  };
  const double c0 = C(x, y);
  const double cxp = C(x + dx, y), cxm = C(x - dx, y);
  const double cyp = C(x, y + dx), cym = C(x, y - dx);
  const double cxx = (cxp - 2.0 * c0 + cxm) / (dx * dx);
  const double cyy = (cyp - 2.0 * c0 + cym) / (dx * dx);
  const double cxy = (C(x + dx, y + dx) - C(x + dx, y - dx) - C(x - dx, y + dx) + C(x - dx, y - dx)) / (4.0 * dx * dx);
  return {(cxp - cxm) / (2.0 * dx), (cyp - cym) / (2.0 * dx), cxx - cyy, cxx + cxy};
}

const char* to_string(DegenerateVerdict v) {
  switch (v) {
    case DegenerateVerdict::d1:
      return "D1";
    case DegenerateVerdict::d2:
      return "D2";
    case DegenerateVerdict::both:
      return "both";
    case DegenerateVerdict::neither:
      return "neither";
  }
  return "unknown";
}

D1D2Report d1_d2_check(const BorellInstance& inst, double t, double x, double y, double tol) {
  require_one_dimensional(inst, "d1_d2_check");
  if (inst.regime() != Regime::sum_one) throw RegimeError("d1_d2_check: requires lambda + mu = 1");
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("d1_d2_check: t must lie in [0,1)");
  const double s = 1.0 - t;
  const double px[1] = {x}, py[1] = {y}, pz[1] = {inst.lambda() * x + inst.mu() * y};
  D1D2Report r;
  r.d1_residual = std::fabs(u_value(inst.f(), s, px) - u_value(inst.g(), s, py));
  r.d2_residual = std::max({std::fabs(u_second_derivative(inst.h(), s, pz, 0, 0)),
                            std::fabs(u_second_derivative(inst.f(), s, px, 0, 0)),
                            std::fabs(u_second_derivative(inst.g(), s, py, 0, 0))});
  const bool d1 = r.d1_residual <= tol, d2 = r.d2_residual <= tol;
  r.verdict = d1 && d2 ? DegenerateVerdict::both
              : d1     ? DegenerateVerdict::d1
              : d2     ? DegenerateVerdict::d2
                       : DegenerateVerdict::neither;
  return r;
}

double diagonal_sde_check(const BorellInstance& inst, const SimConfig& cfg, std::optional<std::uint64_t> reduced_seed) {
  validate(cfg);
  require_one_dimensional(inst, "diagonal_sde_check");
  if (!(inst.f() == inst.g() && inst.f() == inst.h())) throw DomainError("diagonal_sde_check: requires f = g = h");
  if (inst.regime() != Regime::sum_one) throw DomainError("diagonal_sde_check: requires lambda + mu = 1");
  const auto times = time_grid(cfg.dt, cfg.t_end);
  const std::size_t K = times.size() - 1;
  SimConfig reduced_cfg = cfg;
  reduced_cfg.seed = reduced_seed.value_or(cfg.seed);
  std::vector<double> worst(cfg.n_paths, 0.0);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    std::vector<double> full((K + 1) * 2);
    run_path(inst, cfg, times, p, {full.data(), nullptr, nullptr});
    NoiseSource noise = noise_for_path(reduced_cfg, p);
    double x = 0.0, grad[1] = {0.0}, dw[2];
    for (std::size_t k = 0; k < K; ++k) {
      const double step = times[k + 1] - times[k];
      const double px[1] = {x};
      const double u = u_value_and_grad(inst.f(), 1.0 - times[k], px, grad);
      noise.draw(1, 1.0, std::sqrt(step), dw);
      x += -u * grad[0] * step + dw[0];
      worst[p] = std::max(worst[p], std::fabs(full[(k + 1) * 2] - x));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

}  // namespace ebl
