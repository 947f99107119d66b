#include "rbl/weighting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rbl {

void AdaptationParams::validate() const {
  if (!(beta_D > 0 && k_beta > 0 && k_e > 0 && d1 > 0 && d2 > 0 && d3 > 0 && d4 > 0)) {
    throw std::invalid_argument("adaptation params: beta_D, k_beta, k_e, d1..d4 must be > 0");
  }
  if (!(eps_rot > 0.0 && eps_rot < std::numbers::pi / 2)) {
    throw std::invalid_argument("adaptation params: eps_rot must lie in (0, pi/2)");
  }
}

double phi(Point2 q, Point2 pbar, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("phi: beta must be positive");
  return std::exp(-distance(q, pbar) / beta);
}

namespace {

using Vec3 = std::array<double, 3>;  // (mass, moment x, moment y)

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// gamma(2, x) / x^2 and gamma(3, x) / x^3 (lower incomplete gamma), stable at x -> 0.
void scaled_lower_gamma(double x, double& h2, double& h3) {
  if (x < 1.0) {
    double term = 1.0;  // (-x)^k / k!
    h2 = 0.0;
    h3 = 0.0;
    for (int k = 0; k < 30; ++k) {
      h2 += term / (k + 2);
      h3 += term / (k + 3);
      term *= -x / (k + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return;
  }
  const double ex = std::exp(-x);
  const double x2 = x * x;
  h2 = (1.0 - ex * (1.0 + x)) / x2;
  h3 = (2.0 - ex * (x2 + 2.0 * x + 2.0)) / (x2 * x);
}

enum class EdgeMode : std::uint8_t {
  skip,
  direct,     // lower incomplete gamma form, no rescaling
  saturated,  // direct form with the weight fully decayed inside the fan triangle
  tail,       // upper incomplete gamma form, rescaled by exp(d0 / beta)
  tail_near,  // tail regime, edge close to pbar: direct form minus closed-form constants
};

struct Piece {
  int edge;
  double t0;
  double t1;
  Vec3 value;
  Vec3 error;
};

}  // namespace

WeightedCentroid::WeightedCentroid(const ConvexRegion& region, Point2 pbar)
    : region_(region), pbar_(pbar) {
  if (region_.empty()) throw GeometryError("weighted_centroid: empty region");
  inside_ = contains(region_, pbar_);
  d0_ = inside_ ? 0.0 : distance_to_region(region_, pbar_);

  const auto v = region_.vertices();
  const std::size_t n = v.size();
  edges_.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Edge ed{};
    ed.a = v[k] - pbar_;
    const Vec2 b = v[(k + 1) % n] - pbar_;
    ed.e = b - ed.a;
    ed.cross = cross(ed.a, ed.e);
    ed.angle = std::atan2(ed.cross, dot(ed.a, b));
    const double na = norm(ed.a);
    const double nb = norm(b);
    if (na > 0.0 && nb > 0.0) {
      ed.dir_delta = {b.y / nb - ed.a.y / na, ed.a.x / na - b.x / nb};
    }
    const double len2 = squared_norm(ed.e);
    ed.foot = len2 > 0.0 ? std::clamp(-dot(ed.a, ed.e) / len2, 0.0, 1.0) : 0.0;
    ed.r_min = norm(ed.a + ed.foot * ed.e);
    ed.r_max = std::max(na, nb);
    r_max_ = std::max(r_max_, ed.r_max);
    edges_.push_back(ed);
  }
}

CentroidResult WeightedCentroid::operator()(double beta) const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("weighted_centroid: beta must be positive and finite");
  }

  const bool tail_regime = !inside_ && r_max_ / beta > 1.0;
  const double b2 = beta * beta;
  const double b3 = b2 * beta;

  std::vector<EdgeMode> modes(edges_.size(), EdgeMode::skip);
  Vec3 closed_form{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& ed = edges_[k];
    if (ed.cross == 0.0) continue;  // fan triangle has no area
    if (!tail_regime) {
      if (inside_ && ed.r_min / beta > 40.0) {
        closed_form[0] += b2 * ed.angle;
        closed_form[1] += 2.0 * b3 * ed.dir_delta.x;
        closed_form[2] += 2.0 * b3 * ed.dir_delta.y;
        modes[k] = EdgeMode::saturated;
      } else {
        modes[k] = EdgeMode::direct;
      }
    } else if ((ed.r_min - d0_) / beta > 50.0) {
      modes[k] = EdgeMode::skip;
    } else if (ed.r_min <= beta) {
      modes[k] = EdgeMode::tail_near;
    } else {
      modes[k] = EdgeMode::tail;
    }
  }

  const double scale = tail_regime ? std::exp(d0_ / beta) : 1.0;

  auto integrand = [&](const Edge& ed, EdgeMode mode, double t) -> Vec3 {
    const Vec2 x = ed.a + t * ed.e;
    const double r2 = squared_norm(x);
    if (mode == EdgeMode::tail) {
      const double r = std::sqrt(r2);
      const double w = beta * std::exp(-(r - d0_) / beta) * ed.cross / r2;
      const double mass = -w * (r + beta);
      const double mom = -w * (r2 + 2.0 * beta * r + 2.0 * b2) / r;
      return {mass, mom * x.x, mom * x.y};
    }
    if (r2 == 0.0) return {0.5 * ed.cross, 0.0, 0.0};
    double h2 = 0.0;
    double h3 = 0.0;
    scaled_lower_gamma(std::sqrt(r2) / beta, h2, h3);
    const double mom = ed.cross * h3;
    return {ed.cross * h2, mom * x.x, mom * x.y};
  };

  auto gauss_kronrod = [&](Piece& p) {
    const Edge& ed = edges_[static_cast<std::size_t>(p.edge)];
    const EdgeMode mode = modes[static_cast<std::size_t>(p.edge)];
    const double half = 0.5 * (p.t1 - p.t0);
    const double mid = 0.5 * (p.t0 + p.t1);
    Vec3 kron{0, 0, 0};
    Vec3 gauss{0, 0, 0};
    const Vec3 fc = integrand(ed, mode, mid);
    for (int c = 0; c < 3; ++c) {
      kron[c] = kWgk[7] * fc[c];
      gauss[c] = kWg[3] * fc[c];
    }
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kXgk[j];
      const Vec3 f1 = integrand(ed, mode, mid - dx);
      const Vec3 f2 = integrand(ed, mode, mid + dx);
      for (int c = 0; c < 3; ++c) {
        kron[c] += kWgk[j] * (f1[c] + f2[c]);
        if (j % 2 == 1) gauss[c] += kWg[j / 2] * (f1[c] + f2[c]);
      }
    }
    for (int c = 0; c < 3; ++c) {
      p.value[c] = kron[c] * half;
      p.error[c] = std::abs((kron[c] - gauss[c]) * half);
    }
  };

  std::vector<Piece> pieces;
  pieces.reserve(2 * edges_.size() + 16);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const EdgeMode mode = modes[k];
    if (mode == EdgeMode::skip || mode == EdgeMode::saturated) continue;
    const double foot = edges_[k].foot;
    const int edge = static_cast<int>(k);
    if (foot > 1e-9 && foot < 1.0 - 1e-9) {
      pieces.push_back({edge, 0.0, foot, {}, {}});
      pieces.push_back({edge, foot, 1.0, {}, {}});
    } else {
      pieces.push_back({edge, 0.0, 1.0, {}, {}});
    }
  }
  for (auto& p : pieces) gauss_kronrod(p);

  // tail_near pieces hold the unscaled direct form; total_of brings them to the
  // tail form on the common exp(d0 / beta) scale.
  auto total_of = [&]() {
    Vec3 total = tail_regime ? Vec3{0, 0, 0} : closed_form;
    for (const auto& p : pieces) {
      const bool near = modes[static_cast<std::size_t>(p.edge)] == EdgeMode::tail_near;
      const double s = near ? scale : 1.0;
      for (int c = 0; c < 3; ++c) total[c] += s * p.value[c];
    }
    if (tail_regime) {
      for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (modes[k] != EdgeMode::tail_near) continue;
        const Edge& ed = edges_[k];
        total[0] -= scale * b2 * ed.angle;
        total[1] -= scale * 2.0 * b3 * ed.dir_delta.x;
        total[2] -= scale * 2.0 * b3 * ed.dir_delta.y;
      }
    }
    return total;
  };

  constexpr double kTol = 1e-10;  // meters, estimated centroid error
  constexpr int kMaxSplits = 600;
  Vec3 total = total_of();
  for (int iter = 0; iter < kMaxSplits && !pieces.empty(); ++iter) {
    const double mass = total[0];
    if (!(mass > 0.0) || !std::isfinite(mass)) break;
    const double cx = total[1] / mass;
    const double cy = total[2] / mass;
    const double lever = std::hypot(cx, cy);
    double sum = 0.0;
    double worst = -1.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& p = pieces[i];
      const bool near = modes[static_cast<std::size_t>(p.edge)] == EdgeMode::tail_near;
      const double s = near ? scale : 1.0;
      const double cost = s * (p.error[1] + p.error[2] + lever * p.error[0]) / mass;
      sum += cost;
      if (cost > worst) {
        worst = cost;
        worst_i = i;
      }
    }
    if (sum <= kTol) break;
    Piece left = pieces[worst_i];
    Piece right = left;
    const double mid = 0.5 * (left.t0 + left.t1);
    if (!(mid > left.t0 && mid < left.t1)) break;
    left.t1 = mid;
    right.t0 = mid;
    gauss_kronrod(left);
    gauss_kronrod(right);
    pieces[worst_i] = left;
    pieces.push_back(right);
    total = total_of();
  }

  CentroidResult out;
  const double mass = total[0];
  if (!(mass > 0.0) || !std::isfinite(mass) || !std::isfinite(total[1]) ||
      !std::isfinite(total[2])) {
    out.point = region_.centroid();
    out.fallback = true;
    return out;
  }
  Point2 c = pbar_ + Vec2{total[1] / mass, total[2] / mass};
  if (!contains(region_, c)) c = closest_point(region_, c);
  out.point = c;
  return out;
}

CentroidResult weighted_centroid_ex(const ConvexRegion& region, Point2 pbar, double beta) {
  return WeightedCentroid(region, pbar)(beta);
}

Point2 weighted_centroid(const ConvexRegion& region, Point2 pbar, double beta) {
  return weighted_centroid_ex(region, pbar, beta).point;
}

namespace {

// Golden-section minimization of f on [lo, hi]; stops early when `done` holds
// for the best value seen so far.
template <class F, class Done>
void golden_section(F&& f, double lo, double hi, double tol, int max_iter, Done&& done) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol && !done(); ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
}

}  // namespace

BetaMinResult beta_min(const ConvexRegion& region_F, Point2 pbar, double d_u,
                       BetaSearchRange range) {
  if (region_F.empty()) throw GeometryError("beta_min: empty region");
  if (!(range.lo > 0.0 && range.hi > range.lo)) {
    throw std::invalid_argument("beta_min: invalid search range");
  }
  const WeightedCentroid centroid(region_F, pbar);
  BetaMinResult res;

  auto clearance_at_log = [&](double log_beta) {
    ++res.evaluations;
    return boundary_distance(region_F, centroid(std::exp(log_beta)).point);
  };

  constexpr int kScan = 32;
  const double log_lo = std::log(range.lo);
  const double log_hi = std::log(range.hi);
  const double step = (log_hi - log_lo) / (kScan - 1);
  std::array<double, kScan> scan{};
  int first_feasible = -1;
  int scanned = 0;
  for (int k = 0; k < kScan; ++k) {
    scan[k] = clearance_at_log(log_lo + step * k);
    scanned = k + 1;
    if (scan[k] >= d_u) {
      first_feasible = k;
      break;
    }
  }

  if (first_feasible == 0) {
    res.beta = range.lo;
    res.clearance = scan[0];
    res.feasible = true;
    return res;
  }

  if (first_feasible > 0) {
    const double a = log_lo + step * (first_feasible - 1);
    const double b = log_lo + step * first_feasible;
    // Start from the feasible bracket end so the result never loses the margin
    // by more than the search tolerance.
    double best_log = b;
    double best_clear = scan[first_feasible];
    double best_obj = (best_clear - d_u) * (best_clear - d_u);
    auto objective = [&](double lb) {
      const double c = clearance_at_log(lb);
      const double o = (c - d_u) * (c - d_u);
      if (o < best_obj) {
        best_obj = o;
        best_log = lb;
        best_clear = c;
      }
      return o;
    };
    golden_section(objective, a, b, 1e-6, 60, [&] { return std::sqrt(best_obj) < 1e-4; });

    // The bracket holds a sign change; bisect if golden-section settled on a
    // spurious local minimum.
    if (std::sqrt(best_obj) > 1e-3) {
      double lo = a;
      double hi = b;
      for (int i = 0; i < 60 && (hi - lo) > 1e-9; ++i) {
        const double m = 0.5 * (lo + hi);
        const double c = clearance_at_log(m);
        const double o = (c - d_u) * (c - d_u);
        if (o < best_obj) {
          best_obj = o;
          best_log = m;
          best_clear = c;
        }
        (c >= d_u ? hi : lo) = m;
        if (std::sqrt(best_obj) < 1e-4) break;
      }
    }
    res.beta = std::exp(best_log);
    res.clearance = best_clear;
    res.feasible = true;
    return res;
  }

  // No crossing: maximize the clearance. Among near-ties prefer the smallest beta.
  double max_clear = -1.0;
  for (int k = 0; k < scanned; ++k) max_clear = std::max(max_clear, scan[k]);
  int k_star = 0;
  while (k_star < scanned && scan[k_star] < max_clear - 1e-4) ++k_star;
  double best_log = log_lo + step * k_star;
  double best_clear = scan[k_star];
  auto neg_clear = [&](double lb) {
    const double c = clearance_at_log(lb);
    if (c > best_clear + 1e-12) {
      best_clear = c;
      best_log = lb;
    }
    return -c;
  };
  const double a = log_lo + step * std::max(0, k_star - 1);
  const double b = log_lo + step * std::min(kScan - 1, k_star + 1);
  golden_section(neg_clear, a, b, 1e-4, 40, [] { return false; });
  res.beta = std::exp(best_log);
  res.clearance = best_clear;
  res.feasible = best_clear >= d_u;
  return res;
}

bool beta_shrink_condition(Point2 p_i, Point2 c_A, Point2 c_S, const AdaptationParams& params) {
  return distance(c_A, p_i) < params.d1 && distance(c_A, c_S) > params.d2;
}

double update_beta(double beta, Point2 p_i, Point2 c_A, Point2 c_S,
                   const AdaptationParams& params, double beta_floor, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("update_beta: dt must be positive");
  const double rate = beta_shrink_condition(p_i, c_A, c_S, params)
                          ? -params.k_beta * beta
                          : -params.k_beta * (beta - params.beta_D);
  return std::max(beta + rate * dt, beta_floor);
}

Point2 rotated_goal(Point2 p_i, Point2 goal, const AdaptationParams& params) {
  const double sign = params.turn_sign == TurnSign::left ? 1.0 : -1.0;
  return p_i + rotated(goal - p_i, sign * (std::numbers::pi / 2 - params.eps_rot));
}

PbarUpdate update_pbar(const AdaptiveState& state, Point2 p_i, Point2 c_A, Point2 c_S,
                       Point2 c_A_goal, Point2 goal, const AdaptationParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("update_pbar: dt must be positive");
  if (state.rotation_active && distance(p_i, c_A_goal) > distance(p_i, c_A)) {
    return {goal, false, true};
  }
  const bool rotate = distance(c_A, p_i) < params.d3 && distance(c_A, c_S) > params.d4;
  const Point2 target = rotate ? rotated_goal(p_i, goal, params) : goal;
  return {state.pbar - params.k_e * dt * (state.pbar - target), rotate, false};
}

}  // namespace rbl
