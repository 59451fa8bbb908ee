//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "grappa/dataio.h"

namespace grappa {
namespace {
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

struct Box {
  Vec3 lo, hi;
  Vec3 project(Vec3 x) const {
    for (int k = 0; k < 3; ++k)
      x[k] = std::clamp(x[k], lo[k], hi[k]);
    return x;
  }
};

// Huber with threshold k, or Tukey bisquare with cutoff k.
struct Loss {
  bool bisquare = false;
  double k = 0.5;

  double rho(double r) const {
    const double a = std::abs(r);
    if (!bisquare)
      return a <= k ? 0.5 * r * r : k * (a - 0.5 * k);
    if (a >= k)
      return k * k / 6.0;
    const double u = 1.0 - (r / k) * (r / k);
    return k * k / 6.0 * (1.0 - u * u * u);
  }
  // IRLS weight, rho'(r) / r.
  double weight(double r) const {
    const double a = std::abs(r);
    if (!bisquare)
      return a <= k ? 1.0 : k / a;
    if (a >= k)
      return 0.0;
    const double u = 1.0 - (r / k) * (r / k);
    return u * u;
  }
};

double model(const Vec3 &p, double t) { return p[0] - p[1] / (p[2] + t); }

double cost(const Vec3 &p, std::span<const double> t,
            const std::vector<double> &y, const Loss &loss) {
  double c = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    c += loss.rho(y[i] - model(p, t[i]));
  return c;
}

// Gaussian elimination with partial pivoting; false when singular.
bool solve3(Mat3 a, Vec3 b, Vec3 &x) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
        pivot = r;
    if (!(std::abs(a[pivot][col]) > 0.0))
      return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c)
        a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < 3; ++c)
      s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// Linear least squares for A and B at fixed C.
Vec3 linear_start(double c, std::span<const double> t,
                  const std::vector<double> &y) {
  const double n = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = 1.0 / (c + t[i]);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  const double intercept = (sy - slope * sx) / n;
  return { intercept, -slope, c };
}

struct Run {
  Vec3 params;
  double cost;
  bool converged;
  int iterations;
  std::vector<double> history;
};

Run levenberg_marquardt(Vec3 p, std::span<const double> t,
                        const std::vector<double> &y, const Box &box,
                        const FitOptions &opt, const Loss &loss) {
  constexpr double kCostTolerance = 1e-15;
  constexpr double kStepTolerance = 1e-12;
  constexpr double kLambdaMax = 1e14;

  p = box.project(p);
  double current = cost(p, t, y, loss);
  double lambda = opt.lambda_init;
  Run run{ p, current, false, 0, { current } };

  for (int it = 0; it < opt.max_iterations; ++it) {
    run.iterations = it + 1;
    Mat3 jtj{};
    Vec3 jtr{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double d = p[2] + t[i];
      const double r = y[i] - model(p, t[i]);
      const double w = loss.weight(r);
      const Vec3 j{ 1.0, -1.0 / d, p[1] / (d * d) };
      for (int a = 0; a < 3; ++a) {
        jtr[a] += w * j[a] * r;
        for (int b = 0; b < 3; ++b)
          jtj[a][b] += w * j[a] * j[b];
      }
    }
    if (current <= std::numeric_limits<double>::min()) {
      run.converged = true;
      break;
    }

    Mat3 damped = jtj;
    for (int a = 0; a < 3; ++a)
      damped[a][a] += lambda * std::max(jtj[a][a], 1e-300);
    Vec3 step{};
    Vec3 trial = p;
    const bool ok = solve3(damped, jtr, step);
    if (ok) {
      for (int a = 0; a < 3; ++a)
        trial[a] = p[a] + step[a];
      trial = box.project(trial);
    }
    const double trial_cost = ok ? cost(trial, t, y, loss)
                                 : std::numeric_limits<double>::infinity();
    if (trial_cost < current) {
      double moved = 0.0;
      for (int a = 0; a < 3; ++a)
        moved = std::max(moved, std::abs(trial[a] - p[a])
                                    / std::max(1.0, std::abs(p[a])));
      const double gain = current - trial_cost;
      p = trial;
      current = trial_cost;
      run.history.push_back(current);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (gain <= kCostTolerance * (1.0 + current) && moved < kStepTolerance) {
        run.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      // No descent direction left inside the box: a stationary point.
      if (lambda > kLambdaMax) {
        run.converged = true;
        break;
      }
    }
  }
  run.params = p;
  run.cost = current;
  return run;
}

double mad_scale(std::vector<double> r) {
  auto median = [](std::vector<double> &v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double hi = v[n / 2];
    if (n % 2)
      return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + n / 2));
  };
  const double m = median(r);
  for (double &v: r)
    v = std::abs(v - m);
  return 1.4826 * median(r);
}
}  // namespace

RobustFit robust_antoine_fit(std::span<const double> temperature_k,
                             std::span<const double> pressure_pa,
                             const FitOptions &options) {
  if (temperature_k.size() != pressure_pa.size())
    throw std::invalid_argument("robust_antoine_fit: length mismatch");
  if (temperature_k.size() < 3)
    throw std::invalid_argument("robust_antoine_fit: needs at least 3 points");
  const auto [tmin, tmax] =
      std::minmax_element(temperature_k.begin(), temperature_k.end());
  if (!(*tmax - *tmin > 1.0))
    throw std::invalid_argument(
        "robust_antoine_fit: temperature spread must exceed 1 K");
  std::vector<double> y(pressure_pa.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(pressure_pa[i] > 0.0) || !(temperature_k[i] > 0.0))
      throw std::invalid_argument(
          "robust_antoine_fit: temperatures and pressures must be positive");
    y[i] = std::log(pressure_pa[i] / 1000.0);
  }

  const ParamRanges &r = options.ranges;
  // C + T must stay positive for every point.
  const double c_floor = std::max(r.c_lo, -*tmin + 1.0);
  if (c_floor > r.c_hi)
    throw std::invalid_argument(
        "robust_antoine_fit: no admissible C for these temperatures");
  const Box box{ { r.a_lo, r.b_lo, c_floor }, { r.a_hi, r.b_hi, r.c_hi } };

  auto multi_start = [&](std::span<const double> tt,
                         const std::vector<double> &yy, const Loss &loss) {
    Run best{ {}, std::numeric_limits<double>::infinity(), false, 0, {} };
    for (double c0: options.c_starts) {
      const Vec3 s = linear_start(std::clamp(c0, c_floor, r.c_hi), tt, yy);
      Run run = levenberg_marquardt(s, tt, yy, box, options, loss);
      if (run.cost < best.cost)
        best = std::move(run);
    }
    return best;
  };
  auto residual_scale = [&](const Vec3 &p) {
    std::vector<double> res(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      res[i] = y[i] - model(p, temperature_k[i]);
    return mad_scale(std::move(res));
  };

  const Loss huber{ false, options.delta };
  Run best = multi_start(temperature_k, y, huber);
  double scale = residual_scale(best.params);
  if (options.redescend) {
    // Huber bounds the pull of an outlier but does not remove it, and the
    // near-collinear (A, B, C) let a single bad point at the end of a short
    // curve shift the whole fit. Fits with one point held out are further
    // candidates; the one with the smallest residual scale on all points
    // seeds a bisquare fit whose cutoff follows that scale.
    const std::size_t n = y.size();
    Vec3 seed = best.params;
    if (n >= 5 && n <= options.max_holdout_points) {
      std::vector<double> tt(n - 1), yy(n - 1);
      for (std::size_t skip = 0; skip < n; ++skip) {
        for (std::size_t i = 0, j = 0; i < n; ++i)
          if (i != skip) {
            tt[j] = temperature_k[i];
            yy[j++] = y[i];
          }
        const Vec3 p = multi_start(tt, yy, huber).params;
        const double s = residual_scale(p);
        if (s < scale) {
          scale = s;
          seed = p;
        }
      }
    }
    const Loss bisquare{ true, options.bisquare_k
                                   * std::max(scale, options.min_scale) };
    best = levenberg_marquardt(seed, temperature_k, y, box, options, bisquare);
  }

  RobustFit fit;
  fit.params = { best.params[0], best.params[1], best.params[2] };
  fit.cost = best.cost;
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  fit.scale = scale;
  fit.cost_history = std::move(best.history);
  fit.residuals.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    fit.residuals[i] = y[i] - model(best.params, temperature_k[i]);
  return fit;
}

}  // namespace grappa
