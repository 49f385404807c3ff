#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "flatrep/rep_variety.hpp"

using namespace flatrep;

namespace {

Unitary scalar(Complex z) { return Unitary(CMatrix::Constant(1, 1, z)); }

SurfacePresentation torus() { return make_presentation(SurfaceDescriptor::orientable(1)); }
SurfacePresentation genus2() { return make_presentation(SurfaceDescriptor::orientable(2)); }
SurfacePresentation klein() { return make_presentation(SurfaceDescriptor::nonorientable(2)); }

Representation haar_rep(const SurfacePresentation& p, Index n, std::uint64_t seed) {
  std::vector<Unitary> imgs;
  for (int i = 0; i < p.generator_count; ++i) imgs.push_back(haar_random(n, detail::mix_seed(seed, i)));
  return Representation(p, std::move(imgs));
}

bool non_increasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1]) return false;
  return true;
}

}  // namespace

TEST(Representation, ShapeChecks) {
  EXPECT_THROW(Representation(torus(), {haar_random(2, 0)}), PreconditionError);
  EXPECT_THROW(Representation(torus(), {haar_random(2, 0), haar_random(3, 0)}), DimensionMismatch);
}

TEST(Residual, Examples) {
  EXPECT_EQ(residual(Representation::trivial(genus2(), 3)), 0.0);
  EXPECT_LE(residual(Representation(klein(), {scalar({0, 1}), scalar({0, 1})})), 1e-15);

  CMatrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  EXPECT_NEAR(residual(Representation(torus(), {Unitary(x), Unitary(z)})), 2 * std::sqrt(2.0), 1e-14);
}

TEST(Flow, FlatInputUnchanged) {
  const auto rho = Representation::trivial(torus(), 2);
  const auto [out, report] = flow_to_flat(rho);
  EXPECT_TRUE(out == rho);
  EXPECT_EQ(report.iterations, 0);
}

TEST(Flow, TorusSeed7) {
  const auto [rho, report] = flow_to_flat(haar_rep(torus(), 2, 7), 1e-8, 5000);
  EXPECT_LE(residual(rho), 1e-8);
  EXPECT_LE(report.iterations, 5000);
  EXPECT_TRUE(non_increasing(report.energy_trace));
  for (const auto& u : rho.images()) EXPECT_NO_THROW(Unitary{u.matrix()});
}

TEST(Flow, KleinScalar) {
  const Representation start(klein(), {scalar(std::polar(1.0, 0.1)), scalar({1, 0})});
  const auto [rho, report] = flow_to_flat(start, 1e-11);
  const Complex z1 = rho.image(0).matrix()(0, 0), z2 = rho.image(1).matrix()(0, 0);
  EXPECT_LE(std::abs(z1 * z1 * z2 * z2 - Complex(1, 0)), 1e-10);
  EXPECT_TRUE(non_increasing(report.energy_trace));
}

TEST(Flow, NonConvergenceCarriesBestIterate) {
  const auto start = haar_rep(genus2(), 3, 2);
  try {
    flow_to_flat(start, 1e-8, 3);
    FAIL() << "expected non-convergence";
  } catch (const RepFlowError& e) {
    EXPECT_EQ(e.best().report.iterations, 3);
    EXPECT_LT(residual(e.best().best), residual(start));
    EXPECT_EQ(e.best().report.energy_trace.size(), 4u);
  }
  EXPECT_THROW(flow_to_flat(start, 0.0), PreconditionError);
}

// Riemannian gradient X skew(X^H G) against central differences of E along
// X exp(tS) (realized through the polar retraction, which agrees to second order).
TEST(Flow, RiemannianGradientMatchesFiniteDifferences) {
  int instances = 0;
  for (const auto& p : {torus(), genus2(), klein()}) {
    for (std::uint64_t seed = 0; seed < 7; ++seed) {
      const auto rho = haar_rep(p, 2, 40 + seed);
      const auto mats = to_matrices(rho.images());
      const auto euclid = word_gradient(p.relator, mats);
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd;
      for (int dir = 0; dir < 3; ++dir) {
        std::vector<CMatrix> s(mats.size());
        double analytic = 0.0;
        for (std::size_t i = 0; i < mats.size(); ++i) {
          CMatrix a(2, 2);
          for (Index r = 0; r < 2; ++r)
            for (Index c = 0; c < 2; ++c) a(r, c) = Complex(nd(rng), nd(rng));
          s[i] = 0.5 * (a - a.adjoint());
          const CMatrix grad = tangent_project(rho.image(i), euclid[i]).direction();
          analytic += (grad.adjoint() * mats[i] * s[i]).trace().real();
        }
        const double h = 1e-6;
        auto moved = [&](double t) {
          std::vector<CMatrix> x(mats.size());
          for (std::size_t i = 0; i < mats.size(); ++i)
            x[i] = project_unitary(mats[i] * (CMatrix::Identity(2, 2) + t * s[i])).matrix();
          return word_energy(p.relator, x);
        };
        const double fd = (moved(h) - moved(-h)) / (2 * h);
        EXPECT_LT(std::abs(fd - analytic), 1e-5 * std::max(1.0, std::abs(analytic)));
        ++instances;
      }
    }
  }
  EXPECT_GE(instances, 50);
}

TEST(BlockSum, UnitAndAdditivity) {
  const auto rho = haar_rep(torus(), 2, 1), psi = haar_rep(torus(), 3, 2);
  const auto empty = Representation::trivial(torus(), 0);
  EXPECT_TRUE(block_sum(rho, empty) == rho);
  EXPECT_TRUE(block_sum(empty, rho) == rho);
  const auto sum = block_sum(rho, psi);
  EXPECT_EQ(sum.rank(), 5);
  const double lhs = std::pow(residual(sum), 2), rhs = std::pow(residual(rho), 2) + std::pow(residual(psi), 2);
  EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, rhs));
  EXPECT_THROW(block_sum(rho, haar_rep(klein(), 2, 1)), PreconditionError);
}

TEST(BlockSum, Associative) {
  const auto a = haar_rep(genus2(), 1, 1), b = haar_rep(genus2(), 2, 2), c = haar_rep(genus2(), 1, 3);
  EXPECT_TRUE(block_sum(block_sum(a, b), c) == block_sum(a, block_sum(b, c)));
}

TEST(Obstruction, Examples) {
  EXPECT_EQ(obstruction(Representation::trivial(klein(), 2)), 1);
  EXPECT_EQ(obstruction(Representation::trivial(klein(), 0)), 1);
  const Representation minus(klein(), {scalar({0, 1}), scalar({0, 1})});
  EXPECT_EQ(obstruction(minus), -1);
  EXPECT_EQ(obstruction(block_sum(minus, minus)), 1);
  EXPECT_THROW(obstruction(Representation::trivial(torus(), 1)), PreconditionError);
  EXPECT_THROW(obstruction(haar_rep(klein(), 2, 3)), PreconditionError);
}

TEST(Obstruction, ConjugationInvariant) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto rho = sample_flat(klein(), 2, s);
    EXPECT_EQ(obstruction(rho), obstruction(conjugate(rho, haar_random(2, 100 + s))));
  }
}

TEST(Sample, TorusRankOneAlreadyFlat) {
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LE(residual(sample_flat(torus(), 1, s)), 1e-15);
}

TEST(Sample, GenusTwoSeed11) {
  const auto rho = sample_flat(genus2(), 2, 11);
  EXPECT_LE(residual(rho), 1e-8);
  EXPECT_TRUE(rho == sample_flat(genus2(), 2, 11));
  EXPECT_THROW(sample_flat(genus2(), 0, 1), PreconditionError);
}

TEST(Sample, KleinBothObstructionsOccur) {
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 50; ++s) seen.insert(obstruction(sample_flat(klein(), 2, s)));
  EXPECT_EQ(seen, (std::set<int>{-1, 1}));
}

TEST(Connect, IdenticalEndpoints) {
  const auto rho = sample_flat(genus2(), 2, 1);
  const auto path = connect_flat(rho, rho);
  EXPECT_EQ(path.waypoints.size(), 1u);
  EXPECT_EQ(path.max_residual, residual(rho));
}

TEST(Connect, TorusRankOneGeodesicIsFlat) {
  const auto path = connect_flat(sample_flat(torus(), 1, 1), sample_flat(torus(), 1, 2), 9);
  EXPECT_LE(path.max_residual, 1e-15);
}

TEST(Connect, GenusTwoRankTwo) {
  const auto a = sample_flat(genus2(), 2, 1), b = sample_flat(genus2(), 2, 2);
  const auto path = connect_flat(a, b, 65);
  EXPECT_TRUE(path.waypoints.front() == a);
  EXPECT_TRUE(path.waypoints.back() == b);
  EXPECT_LT(path.max_residual, 1e-3);
  double max_step = 0.0, max_res = 0.0;
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    max_res = std::max(max_res, residual(path.waypoints[i]));
    if (i == 0) continue;
    for (int g = 0; g < 4; ++g)
      max_step = std::max(max_step, dist_frob(path.waypoints[i - 1].image(g), path.waypoints[i].image(g)));
  }
  EXPECT_EQ(max_step, path.max_step);
  EXPECT_EQ(max_res, path.max_residual);
}

TEST(Connect, KleinPathKeepsObstruction) {
  std::vector<Representation> plus, minus;
  for (std::uint64_t s = 0; plus.size() < 2 || minus.size() < 2; ++s) {
    auto r = sample_flat(klein(), 2, s);
    (obstruction(r) > 0 ? plus : minus).push_back(std::move(r));
  }
  for (const auto* cls : {&plus, &minus}) {
    const auto path = connect_flat((*cls)[0], (*cls)[1], 17);
    EXPECT_LT(path.max_residual, 1e-3);
    for (const auto& w : path.waypoints) EXPECT_EQ(obstruction(w), obstruction((*cls)[0]));
  }
}

// Seeds 1 and 3 are both in the +1 class, and their principal geodesic winds the
// determinant product once around the circle.
TEST(Connect, UnwoundSeedingKeepsDeterminantProduct) {
  const auto a = sample_flat(klein(), 2, 1), b = sample_flat(klein(), 2, 3);
  ASSERT_EQ(obstruction(a), 1);
  ASSERT_EQ(obstruction(b), 1);
  for (double t : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const auto p = detail::unwound_point(a, b, t);
    Complex prod(1.0, 0.0);
    for (const auto& u : p.images()) prod *= u.matrix().determinant();
    EXPECT_LT(std::abs(prod - 1.0), 1e-8) << "t = " << t;
  }
  const auto path = connect_flat(a, b);
  EXPECT_LE(path.max_step, 0.25);
  for (const auto& w : path.waypoints) EXPECT_EQ(obstruction(w), 1);
}

TEST(Connect, NewtonCorrectionIsLocal) {
  const auto rho = sample_flat(genus2(), 2, 6);
  std::vector<Unitary> images;
  for (std::size_t i = 0; i < rho.images().size(); ++i) {
    images.push_back(geodesic(rho.image(i), haar_random(2, 50 + i), 0.01));
  }
  const Representation nudged(rho.presentation(), images);
  const double moved = detail::step_between(rho, nudged);
  const auto fixed = detail::newton_project(nudged, 1e-10);
  ASSERT_TRUE(fixed.has_value());
  EXPECT_LE(residual(*fixed), 1e-10);
  EXPECT_LT(detail::step_between(*fixed, nudged), moved);
}

TEST(Connect, GenusTwoPairsStayShort) {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto path = connect_flat(sample_flat(genus2(), 2, 2 * k), sample_flat(genus2(), 2, 2 * k + 1));
    EXPECT_LT(path.max_residual, 1e-3) << k;
    EXPECT_LE(path.max_step, 0.25) << k;
    EXPECT_EQ(path.unconverged, 0) << k;
  }
}

TEST(Connect, Preconditions) {
  EXPECT_THROW(connect_flat(haar_rep(torus(), 2, 1), sample_flat(torus(), 2, 1)), PreconditionError);
  EXPECT_THROW(connect_flat(sample_flat(torus(), 2, 1), sample_flat(torus(), 3, 1)), PreconditionError);
}

TEST(Fingerprint, ConjugationInvariant) {
  const auto rho = sample_flat(genus2(), 3, 5);
  const auto probes = default_probes(rho.presentation());
  const auto a = fingerprint(rho, probes);
  const auto b = fingerprint(conjugate(rho, haar_random(3, 9)), probes);
  EXPECT_LT(fingerprint_distance(a, b), 1e-10);
}

TEST(Fingerprint, TrivialIsAllOnes) {
  const auto fp = fingerprint(Representation::trivial(torus(), 3), default_probes(torus()));
  for (const auto& spec : fp)
    for (const auto& z : spec) EXPECT_LE(std::abs(z - Complex(1, 0)), 1e-14);
}

TEST(Fingerprint, DistinguishesSwappedScalars) {
  const std::vector<Word> probes{Word::generator(0), Word::generator(1)};
  const auto a = fingerprint(Representation(torus(), {scalar({0, 1}), scalar({1, 0})}), probes);
  const auto b = fingerprint(Representation(torus(), {scalar({1, 0}), scalar({0, 1})}), probes);
  EXPECT_GT(fingerprint_distance(a, b), 0.5);
}

TEST(Fingerprint, SortedByArgument) {
  const auto spec = sorted_spectrum(haar_random(5, 3));
  for (std::size_t i = 1; i < spec.size(); ++i) EXPECT_LE(std::arg(spec[i - 1]), std::arg(spec[i]));
}
