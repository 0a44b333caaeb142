#include "fracmeas/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace fracmeas {

LipMap::LipMap(double a_, double b_) : a(a_), b(b_) {
  double lo = std::min(b, a + b);
  double hi = std::max(b, a + b);
  if (!std::isfinite(a) || !std::isfinite(b) || lo < -1e-12 || hi > 1.0 + 1e-12)
    throw std::invalid_argument("affine map must send [0,1] into [0,1]");
}

double LipMap::operator()(double t) const {
  double y = a * t + b;
  return std::min(1.0, std::max(0.0, y));
}

double LipMap::ratio() const { return std::abs(a); }

VectorMeasure VectorMeasure::zero(int n, int N) {
  VectorMeasure m;
  m.n = n;
  m.N = N;
  return m;
}

VectorMeasure VectorMeasure::lebesgue(const Vec& value, int N) {
  VectorMeasure m;
  m.n = static_cast<int>(value.size());
  m.N = N;
  m.cells.assign(N, scale(1.0 / N, value));
  return m;
}

VectorMeasure VectorMeasure::dirac(double t, const Vec& value, int n_dim, int N) {
  VectorMeasure m;
  m.n = n_dim;
  m.N = N;
  if (value.size() != static_cast<size_t>(n_dim)) throw std::invalid_argument("dirac value dimension");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("dirac location outside [0,1]");
  m.atoms[t] = value;
  return m;
}

void VectorMeasure::check_valid() const {
  if (n <= 0 || N <= 0) throw std::invalid_argument("measure dimensions must be positive");
  if (!cells.empty() && cells.size() != static_cast<size_t>(N))
    throw std::invalid_argument("density must have exactly N cells");
  for (const auto& [t, v] : atoms) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("atom outside [0,1]");
    if (v.size() != static_cast<size_t>(n)) throw std::invalid_argument("atom value dimension");
  }
  for (const Vec& c : cells)
    if (c.size() != static_cast<size_t>(n)) throw std::invalid_argument("cell value dimension");
}

Vec eval(const VectorMeasure& mu, const BorelSet& B) {
  Vec r = zeros(mu.n);
  if (mu.has_density()) {
    for (int j = 0; j < mu.N; ++j) {
      double frac = B.overlap(mu.cell_lo(j), mu.cell_lo(j + 1)) * mu.N;
      if (frac > 0) axpy(frac, mu.cells[j], r);
    }
  }
  for (const auto& [t, v] : mu.atoms)
    if (B.contains(t)) axpy(1.0, v, r);
  return r;
}

Vec total_mass(const VectorMeasure& mu) {
  Vec r = zeros(mu.n);
  for (const Vec& c : mu.cells) axpy(1.0, c, r);
  for (const auto& [t, v] : mu.atoms) axpy(1.0, v, r);
  return r;
}

double total_variation(const VectorMeasure& mu) {
  double s = 0;
  for (const Vec& c : mu.cells) s += norm2(c);
  for (const auto& [t, v] : mu.atoms) s += norm2(v);
  return s;
}

double total_variation(const VectorMeasure& mu, const BorelSet& B) {
  double s = 0;
  if (mu.has_density())
    for (int j = 0; j < mu.N; ++j) {
      double frac = B.overlap(mu.cell_lo(j), mu.cell_lo(j + 1)) * mu.N;
      if (frac > 0) s += frac * norm2(mu.cells[j]);
    }
  for (const auto& [t, v] : mu.atoms)
    if (B.contains(t)) s += norm2(v);
  return s;
}

namespace {

int checked_lcm(int a, int b) {
  long long g = std::gcd(a, b);
  long long l = (static_cast<long long>(a) / g) * b;
  if (l > 10'000'000) throw std::invalid_argument("density resolutions are incompatible");
  return static_cast<int>(l);
}

std::vector<Vec> rebin(const std::vector<Vec>& cells, int from_N, int to_N, int n) {
  if (cells.empty() || from_N == to_N) return cells;
  int k = to_N / from_N;  // to_N is a multiple by construction
  std::vector<Vec> out(static_cast<size_t>(to_N));
  for (int j = 0; j < from_N; ++j) {
    Vec part = scale(1.0 / k, cells[j]);
    for (int i = 0; i < k; ++i) out[static_cast<size_t>(j) * k + i] = part;
  }
  (void)n;
  return out;
}

}  // namespace

VectorMeasure linear_combine(double alpha, const VectorMeasure& mu, double beta,
                             const VectorMeasure& nu) {
  if (mu.n != nu.n) throw std::invalid_argument("measure dimensions differ");
  VectorMeasure r;
  r.n = mu.n;
  r.N = checked_lcm(mu.N, nu.N);
  std::vector<Vec> ca = rebin(mu.cells, mu.N, r.N, mu.n);
  std::vector<Vec> cb = rebin(nu.cells, nu.N, r.N, nu.n);
  if (!ca.empty() || !cb.empty()) {
    r.cells.assign(static_cast<size_t>(r.N), zeros(r.n));
    for (int j = 0; j < r.N; ++j) {
      if (!ca.empty()) axpy(alpha, ca[j], r.cells[j]);
      if (!cb.empty()) axpy(beta, cb[j], r.cells[j]);
    }
  }
  for (const auto& [t, v] : mu.atoms) {
    Vec& dst = r.atoms.try_emplace(t, zeros(r.n)).first->second;
    axpy(alpha, v, dst);
  }
  for (const auto& [t, v] : nu.atoms) {
    Vec& dst = r.atoms.try_emplace(t, zeros(r.n)).first->second;
    axpy(beta, v, dst);
  }
  return r;
}

VectorMeasure apply_matrix(const Mat& R, const VectorMeasure& mu) {
  if (R.cols != mu.n) throw std::invalid_argument("matrix does not match measure dimension");
  VectorMeasure r;
  r.n = R.rows;
  r.N = mu.N;
  r.cells.reserve(mu.cells.size());
  for (const Vec& c : mu.cells) r.cells.push_back(matvec(R, c));
  for (const auto& [t, v] : mu.atoms) r.atoms[t] = matvec(R, v);
  return r;
}

namespace {

// Snap a cell-unit coordinate to the nearest integer when it is within a
// hair of it, so maps that send cells onto cells (|a| = 3^-k with N a power
// of 3) do not leak mass across cell boundaries through rounding.
double snap(double s) {
  double r = std::round(s);
  return (std::abs(s - r) < 1e-9) ? r : s;
}

}  // namespace

VectorMeasure pushforward(const LipMap& h, const VectorMeasure& mu) {
  VectorMeasure r;
  r.n = mu.n;
  r.N = mu.N;
  if (h.is_constant()) {
    Vec total = total_mass(mu);
    if (norm2(total) != 0.0 || !mu.atoms.empty() || mu.has_density()) r.atoms[h.b] = total;
    return r;
  }
  for (const auto& [t, v] : mu.atoms) {
    double p = h(t);
    Vec& dst = r.atoms.try_emplace(p, zeros(r.n)).first->second;
    axpy(1.0, v, dst);
  }
  if (mu.has_density()) {
    r.cells.assign(static_cast<size_t>(r.N), zeros(r.n));
    const int N = mu.N;
    for (int j = 0; j < N; ++j) {
      const Vec& m = mu.cells[j];
      if (norm2(m) == 0.0) continue;
      double y0 = h.a * (static_cast<double>(j) / N) + h.b;
      double y1 = h.a * (static_cast<double>(j + 1) / N) + h.b;
      double s_lo = snap(std::min(y0, y1) * N);
      double s_hi = snap(std::max(y0, y1) * N);
      s_lo = std::max(0.0, s_lo);
      s_hi = std::min(static_cast<double>(N), s_hi);
      double len = s_hi - s_lo;
      int k_lo = std::min(N - 1, static_cast<int>(std::floor(s_lo)));
      int k_hi = std::min(N - 1, static_cast<int>(s_hi > s_lo ? std::ceil(s_hi) - 1 : k_lo));
      if (len <= 0) {
        // Image narrower than representable: treat as a point mass at its center.
        double c = std::min(1.0 - 1e-18, (s_lo + s_hi) / (2 * N));
        Vec& dst = r.atoms.try_emplace(c, zeros(r.n)).first->second;
        axpy(1.0, m, dst);
        continue;
      }
      double assigned = 0.0;
      for (int k = k_lo; k <= k_hi; ++k) {
        double frac;
        if (k == k_hi) {
          frac = 1.0 - assigned;  // exact mass conservation
        } else {
          double ov = std::min(s_hi, static_cast<double>(k + 1)) - std::max(s_lo, static_cast<double>(k));
          frac = std::max(0.0, ov) / len;
          assigned += frac;
        }
        if (frac != 0.0) axpy(frac, m, r.cells[k]);
      }
    }
  }
  return r;
}

GridFunction GridFunction::sample(const LipFunction& f, const std::vector<double>& support) {
  GridFunction g;
  g.n = f.n;
  g.support = support;
  std::sort(g.support.begin(), g.support.end());
  g.support.erase(std::unique(g.support.begin(), g.support.end()), g.support.end());
  g.values.reserve(g.support.size());
  for (double t : g.support) g.values.push_back(f(t));
  g.sup_budget = f.sup_budget;
  g.lip_budget = f.lip_budget;
  g.check_valid();
  return g;
}

void GridFunction::check_valid() const {
  if (support.size() != values.size()) throw std::invalid_argument("grid support/value size mismatch");
  for (size_t i = 1; i < support.size(); ++i)
    if (!(support[i] > support[i - 1])) throw std::invalid_argument("grid support must be strictly increasing");
  for (const Vec& v : values)
    if (v.size() != static_cast<size_t>(n)) throw std::invalid_argument("grid value dimension");
  if (measured_sup() > sup_budget + 1e-12 || measured_lip() > lip_budget + 1e-12)
    throw std::invalid_argument("grid function exceeds its declared budgets");
}

double GridFunction::measured_sup() const {
  double s = 0;
  for (const Vec& v : values) s = std::max(s, norm2(v));
  return s;
}

double GridFunction::measured_lip() const {
  double s = 0;
  for (size_t i = 0; i < support.size(); ++i)
    for (size_t j = i + 1; j < support.size(); ++j)
      s = std::max(s, norm2(sub(values[j], values[i])) / (support[j] - support[i]));
  return s;
}

const Vec& GridFunction::at(double t) const {
  auto it = std::lower_bound(support.begin(), support.end(), t);
  if (it == support.end() || *it != t)
    throw std::invalid_argument("grid function undefined at a required point");
  return values[static_cast<size_t>(it - support.begin())];
}

double integrate(const LipFunction& f, const VectorMeasure& mu) {
  if (f.n != mu.n) throw std::invalid_argument("integrand dimension mismatch");
  double s = 0;
  for (int j = 0; j < static_cast<int>(mu.cells.size()); ++j)
    s += dot(f(mu.cell_mid(j)), mu.cells[j]);
  for (const auto& [t, v] : mu.atoms) s += dot(f(t), v);
  return s;
}

double integrate(const GridFunction& f, const VectorMeasure& mu) {
  if (f.n != mu.n) throw std::invalid_argument("integrand dimension mismatch");
  double s = 0;
  for (int j = 0; j < static_cast<int>(mu.cells.size()); ++j)
    s += dot(f.at(mu.cell_mid(j)), mu.cells[j]);
  for (const auto& [t, v] : mu.atoms) s += dot(f.at(t), v);
  return s;
}

PruneResult prune(const VectorMeasure& mu, double eps, int budget) {
  PruneResult res;
  res.measure.n = mu.n;
  res.measure.N = mu.N;
  res.measure.cells = mu.cells;
  for (const auto& [t, v] : mu.atoms) {
    double w = norm2(v);
    if (w < eps)
      res.dropped_variation += w;
    else
      res.measure.atoms.emplace(t, v);
  }
  if (static_cast<int>(res.measure.atoms.size()) <= budget) return res;

  // Over budget: the heaviest half-budget of atoms stays in place (dominant
  // atoms are often probed at their exact positions), the light tail is
  // coalesced per position group at the variation-weighted mean.
  int keep = budget / 2;
  int groups = std::max(1, std::min(budget - keep, mu.N));
  std::vector<std::pair<double, double>> order;  // (-norm, position)
  order.reserve(res.measure.atoms.size());
  for (const auto& [t, v] : res.measure.atoms) order.emplace_back(-norm2(v), t);
  std::nth_element(order.begin(), order.begin() + keep, order.end());
  std::set<double> heavy;
  for (int i = 0; i < keep; ++i) heavy.insert(order[i].second);

  // t * groups can round across a group boundary; correct the index against
  // boundary values computed with the same arithmetic cell_lo uses.
  auto group_of = [groups](double t) {
    int g = std::min(groups - 1, std::max(0, static_cast<int>(t * groups)));
    if (g + 1 < groups && t >= static_cast<double>(g + 1) / groups)
      ++g;
    else if (g > 0 && t < static_cast<double>(g) / groups)
      --g;
    return g;
  };

  std::map<int, std::pair<double, Vec>> grouped;  // group -> (sum w*t, sum v)
  std::map<int, double> weight;
  std::map<double, Vec> merged;
  for (const auto& [t, v] : res.measure.atoms) {
    if (heavy.count(t)) {
      merged.emplace(t, v);
      continue;
    }
    int g = group_of(t);
    auto& slot = grouped.try_emplace(g, 0.0, zeros(mu.n)).first->second;
    double w = norm2(v);
    slot.first += w * t;
    axpy(1.0, v, slot.second);
    weight[g] += w;
  }
  std::map<int, double> group_center;
  for (auto& [g, slot] : grouped) {
    double w = weight[g];
    double pos = w > 0 ? slot.first / w : (g + 0.5) / groups;
    // Keep the centroid inside the group's half-open range; a mean that
    // rounds onto the next boundary would move mass across a cell edge.
    double lo = static_cast<double>(g) / groups;
    double hi = g + 1 == groups ? 1.0 : std::nextafter(static_cast<double>(g + 1) / groups, lo);
    pos = std::min(hi, std::max(lo, pos));
    Vec& dst = merged.try_emplace(pos, zeros(mu.n)).first->second;
    axpy(1.0, slot.second, dst);
    group_center[g] = pos;
  }
  // Transport bound for the merge: each atom moved from t to its group's
  // centroid contributes ||v|| * |t - centroid|.
  for (const auto& [t, v] : res.measure.atoms) {
    if (heavy.count(t)) continue;
    res.coalesce_mk_bound += norm2(v) * std::abs(t - group_center[group_of(t)]);
    res.coalesced += 1;
  }
  res.measure.atoms = std::move(merged);
  return res;
}

}  // namespace fracmeas
