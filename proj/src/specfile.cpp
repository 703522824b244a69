#include "lorhol/specfile.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lorhol/errors.hpp"

namespace lorhol {

namespace {

using json = nlohmann::ordered_json;

json parse_document(const std::string& text, const char* format) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecFileError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecFileError("top level must be an object");
  if (!doc.contains("format") || doc["format"] != format)
    throw SpecFileError(std::string("\"format\" must be \"") + format + "\"");
  if (!doc.contains("version")) throw SpecFileError("missing \"version\"");
  if (doc["version"] != 1) throw SpecFileError("unsupported version " + doc["version"].dump());
  return doc;
}

std::string as_string(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw SpecFileError(what + " must be an expression string");
}

// Rows of strings, full or lower-triangular, into an entries array (b <= a read).
ExprMatrix read_rows(const json& rows, const SymbolTable& symbols, const std::string& what) {
  if (!rows.is_array() || rows.size() != 4) throw SpecFileError(what + " must have 4 rows");
  bool full = true, lower = true;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!rows[i].is_array()) throw SpecFileError(what + " rows must be arrays");
    full = full && rows[i].size() == 4;
    lower = lower && rows[i].size() == i + 1;
  }
  if (!full && !lower) throw SpecFileError(what + " must be a full 4x4 matrix or a lower triangle");
  ExprMatrix m;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const std::string where = what + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      m(static_cast<int>(i), static_cast<int>(j)) = parse_expr(as_string(rows[i][j], where), symbols);
      m(static_cast<int>(j), static_cast<int>(i)) = m(static_cast<int>(i), static_cast<int>(j));
    }
  if (full)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        const std::string where = what + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        const Expr upper = parse_expr(as_string(rows[i][j], where), symbols);
        if (!structurally_equal(upper, m(static_cast<int>(i), static_cast<int>(j))))
          throw SpecFileError(what + " is not symmetric at " + where);
      }
  return m;
}

json write_rows(const ExprMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j <= i; ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

MetricSpec parse_metric_json(const std::string& text) {
  const json doc = parse_document(text, "lorhol-metric");
  if (!doc.contains("coordinates") || !doc["coordinates"].is_array() || doc["coordinates"].size() != 4)
    throw SpecFileError("\"coordinates\" must list 4 names");
  Coordinates coords;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!doc["coordinates"][i].is_string()) throw SpecFileError("coordinate names must be strings");
    coords[i] = doc["coordinates"][i].get<std::string>();
  }
  ParamEnv params;
  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_object()) throw SpecFileError("\"parameters\" must be an object");
    for (const auto& [k, v] : doc["parameters"].items()) {
      if (!v.is_number()) throw SpecFileError("parameter '" + k + "' must be a number");
      params[k] = v.get<double>();
    }
  }
  SymbolTable symbols;
  symbols.coordinates.assign(coords.begin(), coords.end());
  for (const auto& [k, v] : params) symbols.parameters.push_back(k);
  if (!doc.contains("metric")) throw SpecFileError("missing \"metric\"");
  const ExprMatrix g = read_rows(doc["metric"], symbols, "metric");

  std::vector<Expr> constraints;
  if (doc.contains("constraints")) {
    if (!doc["constraints"].is_array()) throw SpecFileError("\"constraints\" must be an array");
    for (const auto& c : doc["constraints"]) constraints.push_back(parse_expr(as_string(c, "constraint"), symbols));
  }
  std::optional<SampleBox> box;
  if (doc.contains("sample_box")) {
    const json& b = doc["sample_box"];
    if (!b.is_array() || b.size() != 4) throw SpecFileError("\"sample_box\" must have 4 [lo, hi] ranges");
    SampleBox sb;
    for (std::size_t i = 0; i < 4; ++i) {
      if (!b[i].is_array() || b[i].size() != 2 || !b[i][0].is_number() || !b[i][1].is_number())
        throw SpecFileError("\"sample_box\" ranges must be [lo, hi] numbers");
      const double lo = b[i][0].get<double>(), hi = b[i][1].get<double>();
      if (!(lo < hi)) throw SpecFileError("\"sample_box\" range " + std::to_string(i) + " is empty");
      sb.ranges[i] = {lo, hi};
    }
    box = sb;
  }
  return MetricSpec(coords, g, params, constraints, box);
}

std::string metric_to_json(const MetricSpec& spec) {
  json doc;
  doc["format"] = "lorhol-metric";
  doc["version"] = 1;
  doc["coordinates"] = json::array();
  for (const auto& c : spec.coordinates()) doc["coordinates"].push_back(c);
  doc["parameters"] = json::object();
  for (const auto& [k, v] : spec.parameters()) doc["parameters"][k] = v;
  doc["metric"] = write_rows(spec.components());
  doc["constraints"] = json::array();
  for (const auto& c : spec.constraints()) doc["constraints"].push_back(to_string(c));
  if (spec.sample_box()) {
    doc["sample_box"] = json::array();
    for (const auto& [lo, hi] : spec.sample_box()->ranges) doc["sample_box"].push_back({lo, hi});
  }
  return doc.dump(2) + "\n";
}

SinyukovPair parse_sinyukov_json(const std::string& text, const MetricSpec& base) {
  const json doc = parse_document(text, "lorhol-sinyukov");
  const SymbolTable symbols = base.symbols();
  SinyukovPair pair;
  pair.base = base;
  if (!doc.contains("tensor")) throw SpecFileError("missing \"tensor\"");
  pair.a = read_rows(doc["tensor"], symbols, "tensor");
  if (!doc.contains("lambda")) throw SpecFileError("missing \"lambda\"");
  const json& l = doc["lambda"];
  if (l.is_string()) {
    if (l != "derive-from-trace") throw SpecFileError("\"lambda\" must be 4 expressions or \"derive-from-trace\"");
  } else {
    if (!l.is_array() || l.size() != 4) throw SpecFileError("\"lambda\" must be 4 expressions or \"derive-from-trace\"");
    OneForm f;
    for (std::size_t i = 0; i < 4; ++i) f[i] = parse_expr(as_string(l[i], "lambda"), symbols);
    pair.lambda = f;
  }
  return pair;
}

std::string sinyukov_to_json(const SinyukovPair& pair) {
  json doc;
  doc["format"] = "lorhol-sinyukov";
  doc["version"] = 1;
  doc["tensor"] = write_rows(pair.a);
  if (pair.lambda) {
    doc["lambda"] = json::array();
    for (const Expr& e : *pair.lambda) doc["lambda"].push_back(to_string(e));
  } else {
    doc["lambda"] = "derive-from-trace";
  }
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecFileError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecFileError("cannot write '" + path + "'");
  out << text;
  if (!out) throw SpecFileError("write to '" + path + "' failed");
}

}  // namespace lorhol
