#include "qclfm/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qclfm {

namespace {

void check_sorted(std::span<const DetectionEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t_ns < events[i - 1].t_ns) {
      throw ConfigError("pair_events: events must be sorted by time");
    }
  }
}

std::vector<MatchedPair> match(const std::vector<DetectionEvent>& signals,
                               const std::vector<DetectionEvent>& idlers, double gate_ns) {
  const double half_gate = gate_ns / 2.0;
  std::vector<MatchedPair> pairs;
  std::vector<bool> used(signals.size(), false);
  std::size_t left = 0;
  for (const auto& idler : idlers) {
    while (left < signals.size() && signals[left].t_ns < idler.t_ns - half_gate) ++left;
    std::size_t best = signals.size();
    double best_dt = 0.0;
    for (std::size_t j = left; j < signals.size() && signals[j].t_ns <= idler.t_ns + half_gate;
         ++j) {
      if (used[j]) continue;
      double dt = std::abs(signals[j].t_ns - idler.t_ns);
      if (dt > half_gate) continue;
      // strict < keeps the earlier signal on ties
      if (best == signals.size() || dt < best_dt) {
        best = j;
        best_dt = dt;
      }
    }
    if (best < signals.size()) {
      used[best] = true;
      pairs.push_back({signals[best], idler, signals[best].t_ns - idler.t_ns});
    }
  }
  return pairs;
}

}  // namespace

std::vector<MatchedPair> pair_events(std::span<const DetectionEvent> events, double gate_ns,
                                     const IdlerRegion& region) {
  if (!(gate_ns > 0.0)) throw ConfigError("pair_events: gate must be positive");
  check_sorted(events);
  std::vector<DetectionEvent> signals, idlers;
  for (const auto& e : events) {
    (region.is_idler(e) ? idlers : signals).push_back(e);
  }
  return match(signals, idlers, gate_ns);
}

std::vector<MatchedPair> time_shifted_pairs(std::span<const DetectionEvent> events,
                                            double gate_ns, const IdlerRegion& region,
                                            double shift_ns) {
  if (!(gate_ns > 0.0)) throw ConfigError("time_shifted_pairs: gate must be positive");
  check_sorted(events);
  std::vector<DetectionEvent> signals, idlers;
  for (const auto& e : events) {
    if (region.is_idler(e)) {
      DetectionEvent shifted = e;
      shifted.t_ns += shift_ns;
      idlers.push_back(shifted);
    } else {
      signals.push_back(e);
    }
  }
  return match(signals, idlers, gate_ns);
}

std::vector<CoincidenceRecord> to_sample_plane(std::span<const MatchedPair> pairs,
                                               const Calibration& calib) {
  std::vector<CoincidenceRecord> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) {
    CoincidenceRecord r;
    r.signal_pos_um = calib.signal_position_um(p.signal);
    r.idler_k = calib.idler_momentum(p.idler);
    r.dt_ns = p.dt_ns;
    records.push_back(r);
  }
  return records;
}

Histogram1D Histogram2D::project_x() const {
  Histogram1D h{x_lo, x_hi, std::vector<double>(static_cast<std::size_t>(nx), 0.0)};
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) h.counts[ix] += counts[static_cast<std::size_t>(iy) * nx + ix];
  }
  return h;
}

Histogram1D Histogram2D::project_y() const {
  Histogram1D h{y_lo, y_hi, std::vector<double>(static_cast<std::size_t>(ny), 0.0)};
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) h.counts[iy] += counts[static_cast<std::size_t>(iy) * nx + ix];
  }
  return h;
}

Histogram2D make_histogram2d(double x_lo, double x_hi, int nx, double y_lo, double y_hi, int ny) {
  if (nx < 1 || ny < 1 || !(x_hi > x_lo) || !(y_hi > y_lo)) {
    throw ConfigError("invalid histogram axes");
  }
  Histogram2D h;
  h.x_lo = x_lo;
  h.x_hi = x_hi;
  h.y_lo = y_lo;
  h.y_hi = y_hi;
  h.nx = nx;
  h.ny = ny;
  h.counts.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  return h;
}

namespace {

struct KPair {
  Vec2 k1, k2;
};

std::vector<KPair> momentum_pairs(std::span<const MatchedPair> pairs, const Calibration& calib) {
  std::vector<KPair> ks;
  ks.reserve(pairs.size());
  for (const auto& p : pairs) {
    ks.push_back({calib.signal_momentum(p.signal), calib.idler_momentum(p.idler)});
  }
  return ks;
}

void fill_joint(JointMomentum& jm, const std::vector<KPair>& ks, double w) {
  for (const auto& kp : ks) {
    jm.kx_joint.add(kp.k1.x, kp.k2.x, w);
    jm.ky_joint.add(kp.k1.y, kp.k2.y, w);
    jm.sum_2d.add(kp.k1.x + kp.k2.x, kp.k1.y + kp.k2.y, w);
    jm.sum_x.add(kp.k1.x + kp.k2.x, w);
    jm.sum_y.add(kp.k1.y + kp.k2.y, w);
  }
}

}  // namespace

JointMomentum joint_momentum_histogram(std::span<const DetectionEvent> events, double gate_ns,
                                       const IdlerRegion& region, const Calibration& calib,
                                       const JointMomentumOptions& opts) {
  auto pairs = pair_events(events, gate_ns, region);
  auto ks = momentum_pairs(pairs, calib);

  double k_range = opts.k_range;
  double sum_range = opts.sum_range;
  if (k_range <= 0.0 || sum_range <= 0.0) {
    double k_max = 0.0;
    double sum_sq = 0.0;
    for (const auto& kp : ks) {
      k_max = std::max({k_max, std::abs(kp.k1.x), std::abs(kp.k1.y), std::abs(kp.k2.x),
                        std::abs(kp.k2.y)});
      double sx = kp.k1.x + kp.k2.x;
      double sy = kp.k1.y + kp.k2.y;
      sum_sq += sx * sx + sy * sy;
    }
    if (k_range <= 0.0) k_range = k_max > 0.0 ? 1.05 * k_max : 1.0;
    if (sum_range <= 0.0) {
      double sum_std = ks.empty() ? 1.0 : std::sqrt(sum_sq / (2.0 * ks.size()));
      sum_range = sum_std > 0.0 ? 6.0 * sum_std : 1.0;
    }
  }

  JointMomentum jm;
  jm.kx_joint = make_histogram2d(-k_range, k_range, opts.bins, -k_range, k_range, opts.bins);
  jm.ky_joint = make_histogram2d(-k_range, k_range, opts.bins, -k_range, k_range, opts.bins);
  jm.sum_2d = make_histogram2d(-sum_range, sum_range, opts.bins, -sum_range, sum_range, opts.bins);
  jm.sum_x = Histogram1D{-sum_range, sum_range,
                         std::vector<double>(static_cast<std::size_t>(opts.bins), 0.0)};
  jm.sum_y = jm.sum_x;
  jm.records = ks.size();
  jm.low_statistics = ks.size() < 1000;
  if (jm.low_statistics) {
    warn_once("joint momentum histogram built from fewer than 1000 coincidences");
  }
  fill_joint(jm, ks, 1.0);

  if (opts.accidental_shift_ns > 0.0) {
    auto shifted = time_shifted_pairs(events, gate_ns, region, opts.accidental_shift_ns);
    fill_joint(jm, momentum_pairs(shifted, calib), -1.0);
  }
  return jm;
}

GaussianFit fit_gaussian(const Histogram1D& profile) {
  const int n = profile.bins();
  if (n < 5) throw ConfigError("fit_gaussian: need at least 5 bins");
  for (double c : profile.counts) {
    if (c < 0.0 && std::abs(c) > 1e-9) {
      // tolerate small negative bins from accidental subtraction
    }
    if (!std::isfinite(c)) throw ConfigError("fit_gaussian: non-finite counts");
  }

  double peak = *std::max_element(profile.counts.begin(), profile.counts.end());
  if (!(peak > 0.0)) {
    GaussianFit flat;
    flat.degenerate = true;
    return flat;
  }

  // moment seed over the half-max core
  double w_sum = 0.0, x_sum = 0.0, xx_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double c = profile.counts[i];
    if (c < 0.5 * peak) continue;
    double x = profile.center(i);
    w_sum += c;
    x_sum += c * x;
    xx_sum += c * x * x;
  }
  double b = x_sum / w_sum;
  double var = xx_sum / w_sum - b * b;
  double sigma = std::sqrt(std::max(var, 0.0));
  if (!(sigma > 0.0)) sigma = profile.bin_width();
  double a = peak;

  double lambda = 1e-3;
  double cost = 0.0;
  auto eval_cost = [&](double pa, double pb, double ps) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = pa * std::exp(-0.5 * std::pow((profile.center(i) - pb) / ps, 2)) -
                 profile.counts[i];
      c += d * d;
    }
    return c;
  };
  cost = eval_cost(a, b, sigma);

  const int max_iterations = 200;
  int iter = 0;
  bool converged = false;
  for (; iter < max_iterations; ++iter) {
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (int i = 0; i < n; ++i) {
      double x = profile.center(i);
      double u = (x - b) / sigma;
      double e = std::exp(-0.5 * u * u);
      double m = a * e;
      double r = m - profile.counts[i];
      double j0 = e;
      double j1 = m * u / sigma;
      double j2 = m * u * u / sigma;
      double j[3] = {j0, j1, j2};
      for (int p = 0; p < 3; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 3; ++q) jtj[p][q] += j[p] * j[q];
      }
    }
    // damped 3x3 solve, Gaussian elimination
    double m3[3][4];
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) m3[p][q] = jtj[p][q] + (p == q ? lambda * jtj[p][p] : 0.0);
      m3[p][3] = -jtr[p];
    }
    bool singular = false;
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int row = col + 1; row < 3; ++row) {
        if (std::abs(m3[row][col]) > std::abs(m3[piv][col])) piv = row;
      }
      if (std::abs(m3[piv][col]) < 1e-300) {
        singular = true;
        break;
      }
      std::swap(m3[piv], m3[col]);
      for (int row = col + 1; row < 3; ++row) {
        double f = m3[row][col] / m3[col][col];
        for (int q = col; q < 4; ++q) m3[row][q] -= f * m3[col][q];
      }
    }
    if (singular) break;
    double delta[3];
    for (int row = 2; row >= 0; --row) {
      double s = m3[row][3];
      for (int q = row + 1; q < 3; ++q) s -= m3[row][q] * delta[q];
      delta[row] = s / m3[row][row];
    }

    double na = a + delta[0];
    double nb = b + delta[1];
    double ns = sigma + delta[2];
    if (!(ns > 0.0)) ns = sigma / 2.0;
    double new_cost = eval_cost(na, nb, ns);
    if (new_cost < cost) {
      double rel = std::abs(cost - new_cost) / std::max(cost, 1e-300);
      a = na;
      b = nb;
      sigma = ns;
      cost = new_cost;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < 1e-14) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  GaussianFit fit;
  fit.a = a;
  fit.b = b;
  fit.sigma = std::abs(sigma);
  fit.residual_norm = std::sqrt(cost);
  fit.iterations = iter;
  fit.converged = converged || eval_cost(a, b, sigma) < 1e-18;
  fit.degenerate = fit.sigma > (profile.hi - profile.lo);
  if (!fit.converged && !fit.degenerate) {
    std::ostringstream msg;
    msg << "fit_gaussian did not converge after " << iter
        << " iterations; last iterate a=" << a << " b=" << b << " sigma=" << sigma
        << " residual=" << fit.residual_norm;
    throw NumericalError(msg.str());
  }
  return fit;
}

Histogram2D ghost_image(std::span<const MatchedPair> pairs, const Calibration& calib, int bins,
                        double k_half_range) {
  Histogram2D img = make_histogram2d(-k_half_range, k_half_range, bins, -k_half_range,
                                     k_half_range, bins);
  for (const auto& p : pairs) {
    Vec2 k = calib.idler_momentum(p.idler);
    img.add(k.x, k.y);
  }
  return img;
}

}  // namespace qclfm
