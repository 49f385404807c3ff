#pragma once

// JSON encodings of the library's value types.
//
//   matrix          {"dim": n, "entries": [[[re, im], ...], ...]}
//   presentation    {"kind": "orientable", "g": g} | {"kind": "nonorientable", "k": k}
//   word            [[index, sign], ...]
//   representation  {"presentation": ..., "n": n, "images": [matrix, ...]}

#include <json.hpp>

#include <string>
#include <vector>

#include "flatrep/hn_strata.hpp"
#include "flatrep/k_calc.hpp"
#include "flatrep/lattice_gauge.hpp"
#include "flatrep/rep_variety.hpp"

namespace flatrep::json_io {

using nlohmann::json;

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return {{"dim", m.rows()}, {"entries", std::move(rows)}};
}

inline json to_json(const Unitary& u) { return to_json(u.matrix()); }

inline CMatrix matrix_from_json(const json& j) {
  const Index n = j.at("dim").get<Index>();
  const auto& rows = j.at("entries");
  if (n < 0 || rows.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("matrix JSON: row count != dim");
  CMatrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const auto& row = rows.at(r);
    if (row.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("matrix JSON: row length != dim");
    for (Index c = 0; c < n; ++c) m(r, c) = Complex(row.at(c).at(0).get<double>(), row.at(c).at(1).get<double>());
  }
  return m;
}

inline json to_json(const Word& w) {
  json out = json::array();
  for (const auto& l : w.letters()) out.push_back({l.generator, l.sign});
  return out;
}

inline Word word_from_json(const json& j) {
  std::vector<Letter> letters;
  for (const auto& l : j) letters.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
  return Word(std::move(letters));
}

inline json to_json(const SurfaceDescriptor& s) {
  if (s.is_orientable()) return {{"kind", "orientable"}, {"g", s.count}};
  return {{"kind", "nonorientable"}, {"k", s.count}};
}

inline json to_json(const SurfacePresentation& p) { return to_json(p.surface); }

inline SurfaceDescriptor surface_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "orientable") return SurfaceDescriptor::orientable(j.at("g").get<int>());
  if (kind == "nonorientable") return SurfaceDescriptor::nonorientable(j.at("k").get<int>());
  throw PreconditionError("unknown surface kind '" + kind + "'");
}

inline json to_json(const Representation& rho) {
  json images = json::array();
  for (const auto& u : rho.images()) images.push_back(to_json(u));
  return {{"presentation", to_json(rho.presentation())}, {"n", rho.rank()}, {"images", std::move(images)}};
}

inline Representation representation_from_json(const json& j) {
  const auto pres = make_presentation(surface_from_json(j.at("presentation")));
  std::vector<Unitary> images;
  for (const auto& m : j.at("images")) images.emplace_back(matrix_from_json(m));
  Representation rho(pres, std::move(images));
  if (rho.rank() != j.at("n").get<Index>()) throw DimensionMismatch("representation JSON: n disagrees with images");
  return rho;
}

inline json to_json(const FlowReport& r) {
  return {{"iterations", r.iterations}, {"final_residual", r.final_residual}, {"energy_trace", r.energy_trace}};
}

inline json to_json(const RepPath& p) {
  json w = json::array();
  for (const auto& r : p.waypoints) w.push_back(to_json(r));
  return {{"waypoint_count", p.waypoints.size()},
          {"max_residual", p.max_residual},
          {"max_step", p.max_step},
          {"unconverged", p.unconverged},
          {"waypoints", std::move(w)}};
}

inline json to_json(const SurfaceComplex& c) {
  json edges = json::array(), faces = json::array(), loops = json::array(), words = json::array();
  for (const auto& e : c.edges) edges.push_back({e.tail, e.head});
  for (const auto& f : c.faces) faces.push_back(to_json(f));
  for (const auto& l : c.generator_loops) loops.push_back(to_json(l));
  for (const auto& w : c.edge_words) words.push_back(to_json(w));
  return {{"presentation", to_json(c.presentation)},
          {"level", c.level},
          {"vertex_count", c.vertex_count},
          {"basepoint", c.basepoint},
          {"edges", std::move(edges)},
          {"faces", std::move(faces)},
          {"generator_loops", std::move(loops)},
          {"edge_words", std::move(words)},
          {"euler_characteristic", c.euler_characteristic()}};
}

inline json to_json(const LatticeConnection& a) {
  json labels = json::array();
  for (const auto& u : a.labels()) labels.push_back(to_json(u));
  return {{"complex", to_json(a.complex())}, {"n", a.dim()}, {"labels", std::move(labels)}};
}

inline json to_json(const HNType& mu) {
  json out = json::array();
  for (const auto& p : mu) out.push_back({p.rank, p.degree});
  return out;
}

inline json to_json(const FgAbelianGroup& g) {
  json torsion = json::array();
  for (const auto& d : g.torsion()) torsion.push_back(d.convert_to<long long>());
  return {{"group", g.to_string()}, {"rank", g.rank()}, {"torsion", std::move(torsion)}};
}

inline json to_json(const ModuliValue& v) {
  if (const auto* g = std::get_if<FgAbelianGroup>(&v)) {
    json j = to_json(*g);
    j["status"] = "proven";
    return j;
  }
  if (const auto* c = std::get_if<ComponentCount>(&v)) return {{"status", "proven"}, {"components", c->count}};
  const auto& cj = std::get<Conjectural>(v);
  json cands = json::array();
  for (const auto& g : cj.candidates) cands.push_back(g.to_string());
  return {{"status", "conjectural"}, {"candidates", std::move(cands)}, {"note", cj.note}};
}

inline json to_json(const IntMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c).convert_to<long long>());
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const ExactnessReport& r) {
  json j{{"exact", r.exact}, {"reason", r.reason}};
  j["failure_node"] = r.failure_node ? json(*r.failure_node) : json(nullptr);
  j["euler_characteristic"] =
      r.euler_characteristic ? json(r.euler_characteristic->convert_to<long long>()) : json(nullptr);
  return j;
}

}  // namespace flatrep::json_io
