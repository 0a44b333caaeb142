#include "fracmeas/borel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracmeas {

BorelSet BorelSet::full() { return closed(0.0, 1.0); }

BorelSet BorelSet::closed(double lo, double hi) { return interval(lo, hi, true, true); }

BorelSet BorelSet::interval(double lo, double hi, bool lo_closed, bool hi_closed) {
  BorelSet b;
  b.add_interval(lo, hi, lo_closed, hi_closed);
  return b;
}

BorelSet BorelSet::point(double t) {
  BorelSet b;
  b.add_point(t);
  return b;
}

BorelSet& BorelSet::add_interval(double lo, double hi, bool lo_closed, bool hi_closed) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("interval endpoints must satisfy 0 <= lo < hi <= 1");
  intervals_.push_back({lo, hi, lo_closed, hi_closed});
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  validate();
  return *this;
}

BorelSet& BorelSet::add_point(double t) {
  if (!(t >= 0.0 && t <= 1.0) || !std::isfinite(t))
    throw std::invalid_argument("point must lie in [0,1]");
  points_.push_back(t);
  std::sort(points_.begin(), points_.end());
  validate();
  return *this;
}

void BorelSet::validate() const {
  for (size_t i = 1; i < intervals_.size(); ++i) {
    const Interval& a = intervals_[i - 1];
    const Interval& b = intervals_[i];
    if (a.hi > b.lo || (a.hi == b.lo && a.hi_closed && b.lo_closed))
      throw std::invalid_argument("intervals must be pairwise disjoint");
  }
  for (size_t i = 1; i < points_.size(); ++i)
    if (points_[i] == points_[i - 1]) throw std::invalid_argument("duplicate isolated point");
  for (double p : points_)
    for (const Interval& iv : intervals_) {
      bool inside = (p > iv.lo || (p == iv.lo && iv.lo_closed)) &&
                    (p < iv.hi || (p == iv.hi && iv.hi_closed));
      if (inside) throw std::invalid_argument("isolated point lies inside an interval");
    }
}

bool BorelSet::contains(double t) const {
  for (const Interval& iv : intervals_) {
    if (t < iv.lo) break;
    bool above = t > iv.lo || (t == iv.lo && iv.lo_closed);
    bool below = t < iv.hi || (t == iv.hi && iv.hi_closed);
    if (above && below) return true;
  }
  return std::binary_search(points_.begin(), points_.end(), t);
}

double BorelSet::overlap(double lo, double hi) const {
  double s = 0;
  for (const Interval& iv : intervals_) {
    double a = std::max(lo, iv.lo);
    double b = std::min(hi, iv.hi);
    if (b > a) s += b - a;
  }
  return s;
}

double BorelSet::lebesgue() const {
  double s = 0;
  for (const Interval& iv : intervals_) s += iv.hi - iv.lo;
  return s;
}

}  // namespace fracmeas
