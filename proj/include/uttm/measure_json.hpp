#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "uttm/dyadic.hpp"
#include "uttm/types.hpp"

namespace uttm {

/// Measure document schema:
///   {"atoms":[{"x":0.5,"w":"1/4"}],
///    "ac":[{"interval":[a,b],"density":[[x,y],...],"delta":d,"mass":"p/q"}]}
/// Weights and masses are exact rational strings; densities are
/// piecewise-linear node tables.
inline MeasureSpec measure_from_json(const nlohmann::json& doc) {
  try {
    MeasureSpec spec;
    if (doc.contains("atoms")) {
      for (const auto& a : doc.at("atoms")) {
        Atom atom;
        atom.x = a.at("x").get<double>();
        atom.w = parse_rational(a.at("w").get<std::string>());
        spec.atoms.push_back(atom);
      }
    }
    if (doc.contains("ac")) {
      for (const auto& p : doc.at("ac")) {
        AcPiece piece;
        piece.a = p.at("interval").at(0).get<double>();
        piece.b = p.at("interval").at(1).get<double>();
        for (const auto& node : p.at("density"))
          piece.density.nodes.push_back(
              {node.at(0).get<double>(), node.at(1).get<double>()});
        piece.delta = p.at("delta").get<double>();
        piece.mass = parse_rational(p.at("mass").get<std::string>());
        spec.pieces.push_back(std::move(piece));
      }
    }
    validate_measure(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("measure document malformed: ") + e.what());
  }
}

inline MeasureSpec load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open measure file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("measure file is not valid JSON: ") + e.what());
  }
  return measure_from_json(doc);
}

inline nlohmann::json approximation_to_json(const DyadicApproximation& approx) {
  nlohmann::json out;
  out["stages"] = approx.stages;
  out["stage_values"] = approx.stage_values;
  out["boundaries"] = approx.boundaries;
  out["increment_norms"] = approx.increment_norms;
  return out;
}

inline nlohmann::json assembly_to_json(const StageAssembly& assembly) {
  nlohmann::json out;
  out["n1"] = assembly.plan.n1;
  out["stages"] = assembly.plan.stages;
  out["final_size"] = assembly.plan.final_size();
  out["stage_norms"] = assembly.stage_norms;
  out["stage_sup_norms"] = assembly.stage_sup_norms;
  out["stage_norm_sum"] = assembly.stage_norm_sum();
  out["sup_norm_sum"] = assembly.sup_norm_sum();
  out["norm_bound"] = assembly.norm_bound();
  nlohmann::json strip = nlohmann::json::array();
  for (const Complex& t : assembly.assembled.strip)
    strip.push_back({t.real(), t.imag()});
  out["assembled_strip"] = strip;
  return out;
}

}  // namespace uttm
