// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "flatrep/hn_strata.hpp"
#include "flatrep/k_calc.hpp"
#include "flatrep/lattice_gauge.hpp"
#include "flatrep/rep_variety.hpp"

using namespace flatrep;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

SurfacePresentation pres(const SurfaceDescriptor& s) { return make_presentation(s); }

Representation haar_start(const SurfacePresentation& p, Index n, std::uint64_t seed) {
  std::vector<Unitary> images;
  for (int i = 0; i < p.generator_count; ++i) images.push_back(haar_random(n, detail::mix_seed(seed, i)));
  return Representation(p, std::move(images));
}

double max_image_error(const Representation& a, const Representation& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.images().size(); ++i)
    e = std::max(e, max_entry_error(a.image(i).matrix(), b.image(i).matrix()));
  return e;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Outcome minimal_codim() {
  Outcome o;
  int cells = 0;
  for (std::int64_t n = 2; n <= 6; ++n)
    for (std::int64_t g = 1; g <= 4; ++g) {
      const auto r = min_nonsemistable_codim(n, g);
      const HNType witness{{1, 1}, {n - 1, -1}};
      const bool has = std::find(r.argmins.begin(), r.argmins.end(), witness) != r.argmins.end();
      if (r.real_codim != 2 * g * (n - 1) + 2 || !has) {
        o.ok = false;
        o.detail += " (n=" + std::to_string(n) + ",g=" + std::to_string(g) + ")";
      }
      ++cells;
    }
  o.detail = std::to_string(cells) + " cells" + o.detail;
  return o;
}

Outcome inequality_sweep() {
  std::set<HNType> seen;
  long violations = 0;
  for (std::int64_t n = 2; n <= 6; ++n)
    for (std::int64_t g = 0; g <= 4; ++g)
      for (auto& mu : enumerate_admissible(n, g, 30)) {
        if (mu.size() < 2 || !seen.insert(mu).second) continue;
        if (!verify_codim_inequalities(mu).ok()) ++violations;
      }
  return {violations == 0 && !seen.empty(),
          std::to_string(seen.size()) + " types, " + std::to_string(violations) + " violations"};
}

Outcome kgroup_table() {
  Outcome o;
  std::ifstream in(std::string(FLATREP_GOLDEN_DIR) + "/kdef_table.csv");
  if (!in) return {false, "golden table missing"};
  std::string line;
  std::getline(in, line);
  int rows = 0, mismatches = 0;
  std::set<std::string> surfaces;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string surface, degree, group;
    std::getline(ss, surface, ',');
    std::getline(ss, degree, ',');
    std::getline(ss, group);
    const auto s = parse_surface(surface);
    const int d = std::stoi(degree);
    const auto kdef = kdef_groups(s, d);
    if (kdef.to_string() != group) ++mismatches;
    const bool should_agree = d >= 1 || !s.is_orientable();
    if ((kdef == k_topological(s, d)) != should_agree) ++mismatches;
    surfaces.insert(surface);
    ++rows;
  }
  o.ok = mismatches == 0 && rows == 112 && surfaces.size() == 14;
  o.detail = std::to_string(rows) + " rows, " + std::to_string(mismatches) + " mismatches";
  return o;
}

Outcome moduli_groups() {
  int bad = 0;
  auto group = [](const SurfaceDescriptor& s, int i) { return std::get<FgAbelianGroup>(moduli_homotopy(s, i)); };
  for (int g = 1; g <= 5; ++g) {
    const auto s = SurfaceDescriptor::orientable(g);
    if (group(s, 1) != FgAbelianGroup::free(2 * g)) ++bad;
    if (group(s, 2) != FgAbelianGroup::free(1)) ++bad;
    if (group(SurfaceDescriptor::connected_sum(g, 1), 1) != FgAbelianGroup::free(2 * g)) ++bad;
    if (group(SurfaceDescriptor::connected_sum(g, 2), 1) != FgAbelianGroup::free(2 * g + 1)) ++bad;
    const auto rep = bott_les_report(s);
    const auto snf = smith_normal_form(rep.bott_cases.at(0).bott_map);
    const auto direct = cokernel(rep.bott_cases.at(0).bott_map);
    if (rep.bott_cases.at(0).cokernel != FgAbelianGroup::free(1) || direct != FgAbelianGroup::free(1) ||
        snf.diagonal() != std::vector<Integer>{1} || !rep.consistent) {
      ++bad;
    }
  }
  return {bad == 0, std::to_string(bad) + " mismatches over g = 1..5"};
}

Outcome excision() {
  std::mt19937_64 rng(20240607);
  std::uniform_int_distribution<int> genus(1, 8);
  std::string pairs;
  bool ok = true;
  for (int t = 0; t < 5; ++t) {
    const int g1 = genus(rng), g2 = genus(rng);
    const auto rep = excision_counterexample(g1, g2);
    ok = ok && !rep.any_exact && rep.euler_obstruction == 1 && rep.control_exact;
    pairs += " (" + std::to_string(g1) + "," + std::to_string(g2) + ")";
  }
  return {ok, "pairs" + pairs};
}

Outcome holonomy_roundtrip() {
  const SurfaceDescriptor surfaces[] = {SurfaceDescriptor::orientable(1), SurfaceDescriptor::orientable(2),
                                        SurfaceDescriptor::nonorientable(2)};
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto p = pres(surfaces[k % 3]);
    const Index n = 1 + (k / 3) % 3;
    const auto rho = sample_flat(p, n, 1000 + k);
    for (int level = 0; level <= 2; ++level) {
      worst = std::max(worst, max_image_error(holonomy_rep(flat_from_rep(rho, build_complex(p, level))), rho));
    }
  }
  return {worst < 1e-12, "20 samples x 3 levels, max error " + fmt(worst)};
}

Outcome gauge_covariance() {
  const SurfaceDescriptor surfaces[] = {SurfaceDescriptor::orientable(1), SurfaceDescriptor::orientable(2),
                                        SurfaceDescriptor::nonorientable(2)};
  double drift = 0.0, conj = 0.0, based = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto c = build_complex(pres(surfaces[s % 3]), 1 + s % 2);
    const Index n = 1 + s % 3;
    const auto a = LatticeConnection::haar_random(c, n, s);
    const auto phi = GaugeTransform::haar_random(c, n, 500 + s, false);
    const auto psi = GaugeTransform::haar_random(c, n, 900 + s, true);
    const auto pa = gauge_act(phi, a);
    drift = std::max(drift, std::abs(ym_energy(pa) - ym_energy(a)));
    const auto ha = holonomy_rep(a), hp = holonomy_rep(pa), hb = holonomy_rep(gauge_act(psi, a));
    const auto& g0 = phi.at(c->basepoint);
    for (std::size_t i = 0; i < ha.images().size(); ++i) {
      conj = std::max(conj, max_entry_error(hp.image(i).matrix(), (g0 * ha.image(i) * g0.inverse()).matrix()));
      based = std::max(based, max_entry_error(hb.image(i).matrix(), ha.image(i).matrix()));
    }
  }
  return {drift < 1e-10 && conj < 1e-10 && based < 1e-10,
          "energy drift " + fmt(drift) + ", conjugation " + fmt(conj) + ", based " + fmt(based)};
}

Outcome flow_convergence() {
  const SurfaceDescriptor surfaces[] = {SurfaceDescriptor::orientable(1), SurfaceDescriptor::orientable(2),
                                        SurfaceDescriptor::nonorientable(2)};
  Outcome o;
  for (const auto& s : surfaces) {
    const auto p = pres(s);
    int good = 0;
    double slowest = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto t0 = Clock::now();
      bool ok = false;
      try {
        const auto [rho, rep] = flow_to_flat(haar_start(p, 2, seed), 1e-8, kDefaultMaxIter);
        ok = residual(rho) <= 1e-8;
        for (std::size_t i = 1; i < rep.energy_trace.size(); ++i)
          if (rep.energy_trace[i] > rep.energy_trace[i - 1]) ok = false;
      } catch (const RepFlowError&) {
      }
      const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
      slowest = std::max(slowest, dt);
      if (ok && dt < 5.0) ++good;
    }
    if (good < 99) o.ok = false;
    o.detail += s.name() + " " + std::to_string(good) + "/100 (slowest " + fmt(slowest) + "s) ";
  }
  return o;
}

Outcome connectivity() {
  const auto g2 = pres(SurfaceDescriptor::orientable(2));
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto path = connect_flat(sample_flat(g2, 2, 2 * k), sample_flat(g2, 2, 2 * k + 1));
    worst = std::max(worst, path.max_residual);
  }
  const auto kb = pres(SurfaceDescriptor::nonorientable(2));
  std::vector<Representation> plus, minus;
  for (std::uint64_t s = 0; plus.size() < 3 || minus.size() < 3; ++s) {
    auto r = sample_flat(kb, 2, s);
    (obstruction(r) > 0 ? plus : minus).push_back(std::move(r));
  }
  int paths = 0, broken = 0;
  double klein_worst = 0.0;
  for (const auto* cls : {&plus, &minus}) {
    for (std::size_t i = 0; i + 1 < cls->size(); ++i) {
      const auto path = connect_flat((*cls)[i], (*cls)[i + 1]);
      klein_worst = std::max(klein_worst, path.max_residual);
      const int sign = obstruction((*cls)[i]);
      for (const auto& w : path.waypoints) {
        try {
          if (obstruction(w) != sign) ++broken;
        } catch (const PreconditionError&) {
          ++broken;
        }
      }
      ++paths;
    }
  }
  return {worst < 1e-3 && klein_worst < 1e-3 && broken == 0,
          "genus2 max residual " + fmt(worst) + "; klein " + std::to_string(paths) + " paths, max residual " +
              fmt(klein_worst) + ", " + std::to_string(broken) + " sign changes"};
}

Outcome two_components() {
  const auto kb = pres(SurfaceDescriptor::nonorientable(2));
  std::vector<Representation> minus;
  bool both = true;
  for (Index n = 1; n <= 3; ++n) {
    std::set<int> signs;
    for (std::uint64_t s = 0; s < 50; ++s) {
      auto r = sample_flat(kb, n, 7000 + s);
      const int sign = obstruction(r);
      signs.insert(sign);
      if (sign < 0 && minus.size() < 24) minus.push_back(std::move(r));
    }
    both = both && signs.size() == 2;
  }
  int sums = 0, wrong = 0;
  for (std::size_t i = 0; i < minus.size(); ++i)
    for (std::size_t j = i; j < minus.size(); ++j) {
      if (obstruction(block_sum(minus[i], minus[j])) != 1) ++wrong;
      ++sums;
    }
  return {both && wrong == 0 && sums > 0,
          std::string(both ? "both signs at n = 1, 2, 3" : "a sign is missing") + "; " + std::to_string(sums) +
              " block sums, " + std::to_string(wrong) + " wrong"};
}

Outcome gradient() {
  const SurfaceDescriptor surfaces[] = {SurfaceDescriptor::orientable(1),    SurfaceDescriptor::orientable(2),
                                        SurfaceDescriptor::orientable(3),    SurfaceDescriptor::nonorientable(2),
                                        SurfaceDescriptor::nonorientable(3), SurfaceDescriptor::nonorientable(4)};
  int instances = 0;
  double worst = 0.0;
  for (const auto& s : surfaces) {
    const auto p = pres(s);
    for (Index n : {2, 3}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto rho = haar_start(p, n, 300 + seed);
        const auto mats = to_matrices(rho.images());
        const auto euclid = word_gradient(p.relator, mats);
        std::vector<CMatrix> grad;
        for (std::size_t i = 0; i < mats.size(); ++i) grad.push_back(tangent_project(rho.image(i), euclid[i]).direction());
        std::mt19937_64 rng(seed * 7 + n);
        std::normal_distribution<double> nd;
        double num = 0.0, den = 0.0;
        for (int dir = 0; dir < 4; ++dir) {
          std::vector<CMatrix> skew(mats.size());
          double analytic = 0.0;
          for (std::size_t i = 0; i < mats.size(); ++i) {
            CMatrix a(n, n);
            for (Index r = 0; r < n; ++r)
              for (Index c = 0; c < n; ++c) a(r, c) = Complex(nd(rng), nd(rng));
            skew[i] = 0.5 * (a - a.adjoint());
            analytic += (grad[i].adjoint() * mats[i] * skew[i]).trace().real();
          }
          auto energy_at = [&](double t) {
            std::vector<CMatrix> x(mats.size());
            for (std::size_t i = 0; i < mats.size(); ++i)
              x[i] = project_unitary(mats[i] * (CMatrix::Identity(n, n) + t * skew[i])).matrix();
            return word_energy(p.relator, x);
          };
          const double h = 1e-6;
          const double fd = (energy_at(h) - energy_at(-h)) / (2 * h);
          num += (fd - analytic) * (fd - analytic);
          den += analytic * analytic;
        }
        worst = std::max(worst, std::sqrt(num / den));
        ++instances;
      }
    }
  }
  return {instances >= 50 && worst < 1e-5, std::to_string(instances) + " instances, max relative error " + fmt(worst)};
}

Outcome connectivity_table() {
  const auto a = connectivity_bound(pres(SurfaceDescriptor::orientable(1)), 2);
  const auto b = connectivity_bound(pres(SurfaceDescriptor::orientable(2)), 3);
  const auto c = connectivity_bound(pres(SurfaceDescriptor::nonorientable(2)), 3);
  return {a == 2 && b == 8 && c == 1,
          "(1,2) -> " + std::to_string(a) + ", (2,3) -> " + std::to_string(b) + ", klein n=3 -> " + std::to_string(c)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"minimal stratum codimension 2g(n-1)+2", 10, minimal_codim},
      {"codimension inequality sweep", 30, inequality_sweep},
      {"deformation K-group golden table", 5, kgroup_table},
      {"moduli homotopy groups and Bott cokernel", 5, moduli_groups},
      {"excision failure certificate", 5, excision},
      {"holonomy roundtrip", 60, holonomy_roundtrip},
      {"gauge covariance", 60, gauge_covariance},
      {"flow convergence", 900, flow_convergence},
      {"connectivity evidence", 300, connectivity},
      {"two components and block-sum sign law", 120, two_components},
      {"Riemannian gradient vs finite differences", 30, gradient},
      {"connectivity bound table", 5, connectivity_table},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (dt > c.budget_seconds) {
      o.ok = false;
      o.detail += " [over budget " + fmt(c.budget_seconds) + "s]";
    }
    if (!o.ok) ++failures;
    std::printf("%s %2zu %-44s %8.2fs  %s\n", o.ok ? "PASS" : "FAIL", i + 1, c.name.c_str(), dt, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
