#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracmeas/markov.hpp"

using namespace fracmeas;

namespace {

struct Rng {
  std::mt19937_64 g;
  explicit Rng(uint64_t seed) : g(seed) {}
  double unit() { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int upto(int n) { return std::min(n - 1, static_cast<int>(unit() * n)); }
};

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a; m(0, 1) = b;
  m(1, 0) = c; m(1, 1) = d;
  return m;
}

// Independent spectral norm estimate: power iteration on R^T R from a fixed
// start, run far past the library's own tolerance.
double power_norm(const Mat& R) {
  Mat G = transpose(R) * R;
  Vec x(static_cast<size_t>(G.rows), 1.0);
  double lambda = 0;
  for (int it = 0; it < 20000; ++it) {
    Vec y = matvec(G, x);
    lambda = norm2(y);
    if (lambda == 0) return 0;
    x = scale(1.0 / lambda, y);
  }
  return std::sqrt(lambda);
}

Mat random_mat(Rng& rng, int n, double amplitude) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.range(-amplitude, amplitude);
  return m;
}

VectorMeasure random_atomic(Rng& rng, int n, int max_atoms) {
  VectorMeasure mu = VectorMeasure::zero(n);
  int count = 1 + rng.upto(max_atoms);
  for (int a = 0; a < count; ++a) {
    Vec v(static_cast<size_t>(n));
    for (double& x : v) x = rng.range(-1.0, 1.0);
    mu.atoms[rng.unit()] = std::move(v);
  }
  return mu;
}

const double kThird = 1.0 / 3.0;

MarkovOperator cantor_weights(double alpha) {
  Mat left(1, 1), right(1, 1);
  left(0, 0) = alpha;
  right(0, 0) = 1.0 - alpha;
  return MarkovOperator::h({{LipMap(kThird, 0.0), left}, {LipMap(kThird, 2 * kThird), right}});
}

}  // namespace

TEST_CASE("operator norm reproduces the reference constants") {
  Mat P1 = mat2(1, 0, 2, 1);
  Mat P2 = mat2(1, 0, 2, -1);
  const double golden = 1.0 + std::sqrt(2.0);
  CHECK(std::abs(operator_norm(P1) - golden) <= 1e-10);
  CHECK(std::abs(operator_norm(P2) - golden) <= 1e-10);

  Mat R1 = mat2(1.0 / 8, 1.0 / 8, -1.0 / 16, 1.0 / 8);
  Mat R2 = mat2(1.0 / 8, -1.0 / 8, 1.0 / 16, 1.0 / 8);
  CHECK(std::abs(operator_norm(R1) - 3.0 / 16) <= 1e-10);
  CHECK(std::abs(operator_norm(R2) - 3.0 / 16) <= 1e-10);

  CHECK(std::abs(operator_norm(Mat::identity(4)) - 1.0) <= 1e-12);
}

TEST_CASE("operator norm agrees with power iteration on random matrices") {
  Rng rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + rng.upto(4);
    Mat R = random_mat(rng, n, 2.0);
    double lib = operator_norm(R);
    CHECK(std::abs(lib - power_norm(R)) <= 1e-8 * (1.0 + lib));
    // Norm bound on random vectors.
    Vec x(static_cast<size_t>(n));
    for (double& xi : x) xi = rng.range(-1.0, 1.0);
    CHECK(norm2(matvec(R, x)) <= lib * norm2(x) + 1e-10);
  }
}

TEST_CASE("apply distributes a point mass over the maps") {
  MarkovOperator H = cantor_weights(0.3);
  VectorMeasure img = apply(H, VectorMeasure::dirac(0.0, {1.0}, 1));
  REQUIRE(img.atoms.size() == 2);
  CHECK(std::abs(img.atoms.at(0.0)[0] - 0.3) <= 1e-15);
  CHECK(std::abs(img.atoms.at(2 * kThird)[0] - 0.7) <= 1e-15);
}

TEST_CASE("apply preserves mass when the matrices sum to the identity") {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + rng.upto(3);
    Mat A = random_mat(rng, n, 0.4);
    Mat B = Mat::identity(n) - A;  // A + B = Id by construction
    std::vector<MarkovTerm> terms = {{LipMap(kThird, 0.0), A}, {LipMap(kThird, 2 * kThird), B}};
    VectorMeasure mu = random_atomic(rng, n, 4);
    Vec before = total_mass(mu);
    Vec after = total_mass(apply(MarkovOperator::h(terms), mu));
    for (int i = 0; i < n; ++i) CHECK(std::abs(after[i] - before[i]) <= 1e-13);

    // Zero-mass inputs stay at zero mass.
    VectorMeasure nu = mu;
    Vec neg = scale(-1.0, before);
    auto it = nu.atoms.find(0.5);
    nu.atoms[0.5] = it == nu.atoms.end() ? neg : add(it->second, neg);
    Vec zero = total_mass(apply(MarkovOperator::h(terms), nu));
    for (int i = 0; i < n; ++i) CHECK(std::abs(zero[i]) <= 1e-13);
  }
}

TEST_CASE("apply respects the variation bound") {
  Rng rng(203);
  Mat R1 = scale(0.1, mat2(1, 0, 2, 1));
  Mat R2 = scale(0.1, mat2(1, 0, 2, -1));
  MarkovOperator H =
      MarkovOperator::h({{LipMap(kThird, 0.0), R1}, {LipMap(kThird, 2 * kThird), R2}});
  double e = bounds(H).e;
  for (int trial = 0; trial < 20; ++trial) {
    VectorMeasure mu = random_atomic(rng, 2, 5);
    CHECK(total_variation(apply(H, mu)) <= e * total_variation(mu) + 1e-12);
  }
}

TEST_CASE("pullback matches the symbolic composition") {
  // Scalar weights alpha, 1-alpha on the Cantor maps acting on f(t) = t give
  // g(t) = alpha*(t/3) + (1-alpha)*((t+2)/3) = t/3 + (2/3)(1-alpha).
  const double alpha = 0.4;
  MarkovOperator H = cantor_weights(alpha);
  LipFunction f{1, 1.0, 1.0, [](double t) { return Vec{t}; }};
  LipFunction g = pullback(H, f);
  for (double t : {0.0, 0.2, 0.5, 0.77, 1.0})
    CHECK(std::abs(g(t)[0] - (t / 3.0 + 2.0 / 3.0 * (1 - alpha))) <= 1e-15);
  CHECK(g.lip_budget <= kThird * (alpha + (1 - alpha)) + 1e-15);

  // Identity operator: the pullback is f itself.
  MarkovOperator ident = MarkovOperator::h({{LipMap(1.0, 0.0), Mat::identity(2)}});
  LipFunction f2{2, 2.0, 2.0, [](double t) { return Vec{t, 1.0 - t}; }};
  LipFunction same = pullback(ident, f2);
  for (double t : {0.0, 0.31, 1.0}) {
    CHECK(same(t)[0] == f2(t)[0]);
    CHECK(same(t)[1] == f2(t)[1]);
  }
}

TEST_CASE("pullback budgets dominate measured constants") {
  Rng rng(204);
  Mat R1 = scale(0.1, mat2(1, 0, 2, 1));
  Mat R2 = scale(0.1, mat2(1, 0, 2, -1));
  MarkovOperator H =
      MarkovOperator::h({{LipMap(kThird, 0.0), R1}, {LipMap(kThird, 2 * kThird), R2}});
  for (int trial = 0; trial < 10; ++trial) {
    double c1 = rng.range(-1.0, 1.0), c2 = rng.range(-1.0, 1.0);
    LipFunction f{2, std::hypot(1 + std::abs(c1), 1 + std::abs(c2)),
                  2.0 * std::hypot(c1, c2) + 2.0, [c1, c2](double t) {
                    return Vec{std::sin(2.0 * t) * c1, std::cos(2.0 * t) * c2 + t};
                  }};
    LipFunction g = pullback(H, f);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(i / 40.0);
    GridFunction sampled = GridFunction::sample(g, grid);
    CHECK(sampled.measured_sup() <= g.sup_budget + 1e-12);
    CHECK(sampled.measured_lip() <= g.lip_budget + 1e-12);
  }
}

TEST_CASE("contraction bounds for the worked systems") {
  Mat R1 = scale(0.1, mat2(1, 0, 2, 1));
  Mat R2 = scale(0.1, mat2(1, 0, 2, -1));
  MarkovOperator pair =
      MarkovOperator::h({{LipMap(kThird, 0.0), R1}, {LipMap(kThird, 2 * kThird), R2}});
  ContractionBounds b = bounds(pair);
  const double e = (1.0 + std::sqrt(2.0)) / 5.0;
  CHECK(std::abs(b.e - e) <= 1e-10);
  CHECK(std::abs(b.c - e / 3.0) <= 1e-10);
  CHECK(std::abs(b.d - 4.0 * e / 3.0) <= 1e-10);
  CHECK(b.contracts_variation);
  CHECK(b.contracts_mk);
  CHECK(b.contracts_mk_star);

  ContractionBounds cb = bounds(cantor_weights(0.25));
  CHECK(std::abs(cb.e - 1.0) <= 1e-12);
  CHECK(std::abs(cb.c - kThird) <= 1e-12);
  CHECK(std::abs(cb.d - 4.0 / 3.0) <= 1e-12);
  CHECK(!cb.contracts_variation);
  CHECK(!cb.contracts_mk);
  CHECK(cb.contracts_mk_star);

  // Constant maps have ratio zero, so c vanishes and d collapses onto e.
  MarkovOperator constant = MarkovOperator::h(
      {{LipMap::constant(0.0), scale(0.3, Mat::identity(2))},
       {LipMap::constant(1.0), scale(0.4, Mat::identity(2))}});
  ContractionBounds kb = bounds(constant);
  CHECK(kb.c == 0.0);
  CHECK(kb.d == kb.e);
}

TEST_CASE("change of variable vanishes on atomic measures") {
  Rng rng(205);
  Mat R1 = scale(0.1, mat2(1, 0, 2, 1));
  Mat R2 = scale(0.1, mat2(1, 0, 2, -1));
  MarkovOperator H =
      MarkovOperator::h({{LipMap(kThird, 0.0), R1}, {LipMap(kThird, 2 * kThird), R2}});
  LipFunction f{2, std::sqrt(2.0), 2.0 * std::sqrt(2.0), [](double t) {
                  return Vec{std::sin(2.0 * t), std::cos(2.0 * t)};
                }};
  for (int trial = 0; trial < 20; ++trial)
    CHECK(change_of_variable_check(H, f, random_atomic(rng, 2, 5)) <= 1e-12);
}

TEST_CASE("change of variable stays small on densities") {
  // Midpoint quadrature error only; the triadic grid keeps pushforwards exact.
  VectorMeasure lam = VectorMeasure::lebesgue({1.0}, 243);
  MarkovOperator H = cantor_weights(0.5);
  LipFunction f{1, 1.0, 1.0, [](double t) { return Vec{t}; }};
  CHECK(change_of_variable_check(H, f, lam) <= 1e-3);
}

TEST_CASE("truncate finds the smallest admissible cut") {
  // Geometric family with ||seed|| = 1/2 and ratio 1/2 has b_i = 2^-i, so
  // tail(M) = 2^-M and the first tail below 1e-3 is at M = 10.
  Mat seed(1, 1);
  seed(0, 0) = 0.5;
  CountableFamily fam = geometric_family(0.5, seed);
  TruncationResult tr = truncate(fam, 1e-3);
  CHECK(tr.M == 10);
  CHECK(std::abs(tr.tail - std::pow(2.0, -10)) <= 1e-15);
  CHECK(tr.terms.size() == 10);

  // A threshold looser than the whole series still yields one term.
  TruncationResult one = truncate(fam, 10.0);
  CHECK(one.M == 1);

  CHECK_THROWS_AS(truncate(fam, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(fam, 1e-40, 50), NumericalError);
}

TEST_CASE("truncation error is bounded by the reported tail") {
  Rng rng(206);
  Mat seed = mat2(0.3, 0.1, -0.2, 0.25);
  CountableFamily fam = geometric_family(0.6, seed);
  TruncationResult coarse = truncate(fam, 1e-2);
  TruncationResult fine = truncate(fam, 1e-8);
  MarkovOperator Hc = MarkovOperator::h(coarse.terms);
  MarkovOperator Hf = MarkovOperator::h(fine.terms);
  for (int trial = 0; trial < 20; ++trial) {
    VectorMeasure mu = random_atomic(rng, 2, 4);
    VectorMeasure diff = linear_combine(1.0, apply(Hc, mu), -1.0, apply(Hf, mu));
    CHECK(total_variation(diff) <= coarse.tail * total_variation(mu) + 1e-12);
  }
}

TEST_CASE("exp series family tail matches the exponential remainder") {
  Mat P = mat2(0.8, 0.2, -0.3, 0.5);
  CountableFamily fam = exp_series_family(P);
  double p = operator_norm(P);
  // tail(M) = exp(||P||) - sum_{i<=M} ||P||^i / i!, checked for a few M.
  double partial = 1.0;
  double term = 1.0;
  for (int M = 1; M <= 6; ++M) {
    term *= p / M;
    partial += term;
    CHECK(std::abs(fam.tail(M) - (std::exp(p) - partial)) <= 1e-12);
  }
  // Term i carries -P^i / i! at the constant point 1/(i+1).
  TruncationResult tr = truncate(fam, 1e-10);
  CHECK(tr.terms[0].map.is_constant());
  CHECK(tr.terms[0].map.b == 0.5);
  CHECK(max_abs(tr.terms[0].R + P) <= 1e-15);
}

TEST_CASE("operator construction rejects bad input") {
  CHECK_THROWS_AS(MarkovOperator::h({}), std::invalid_argument);

  Mat a = mat2(0.5, 0, 0, 0.4);
  CHECK_THROWS_AS(
      MarkovOperator::h1({{LipMap(kThird, 0.0), a}, {LipMap(kThird, 2 * kThird), a}}, {1.0, 0.0}),
      std::invalid_argument);  // matrices sum to diag(1, 0.8), not the identity

  VectorMeasure mu0 = VectorMeasure::zero(3);
  CHECK_THROWS_AS(
      MarkovOperator::h2({{LipMap(kThird, 0.0), a}, {LipMap(kThird, 2 * kThird), a}}, mu0),
      std::invalid_argument);  // offset dimension mismatch

  VectorMeasure mu = VectorMeasure::zero(3);
  MarkovOperator H = MarkovOperator::h({{LipMap(kThird, 0.0), a}});
  CHECK_THROWS_AS(apply(H, mu), std::invalid_argument);
}
