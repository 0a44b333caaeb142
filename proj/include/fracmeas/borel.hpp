#pragma once

#include <vector>

namespace fracmeas {

// One interval of [0,1] with independently closed or open endpoints.
// Degenerate intervals (lo == hi) are not allowed; use isolated points.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;
};

// A Borel subset of T = [0,1] restricted to what the engine can represent
// exactly: a finite union of disjoint intervals plus isolated points.
// Membership tests compare doubles exactly; endpoints are expected to be
// produced by the same arithmetic as the measures they probe.
class BorelSet {
 public:
  BorelSet() = default;

  static BorelSet empty() { return BorelSet(); }
  static BorelSet full();
  static BorelSet closed(double lo, double hi);
  static BorelSet interval(double lo, double hi, bool lo_closed, bool hi_closed);
  static BorelSet point(double t);

  BorelSet& add_interval(double lo, double hi, bool lo_closed, bool hi_closed);
  BorelSet& add_point(double t);

  bool contains(double t) const;
  // Lebesgue length of the overlap with [lo, hi); endpoint flags are
  // irrelevant at measure-zero boundaries.
  double overlap(double lo, double hi) const;
  double lebesgue() const;
  bool is_empty() const { return intervals_.empty() && points_.empty(); }

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<double>& points() const { return points_; }

 private:
  void validate() const;
  std::vector<Interval> intervals_;  // sorted by lo, pairwise disjoint
  std::vector<double> points_;       // sorted, not inside any interval
};

}  // namespace fracmeas
