#include "otmap/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "otmap/errors.hpp"

namespace otmap {

using nlohmann::json;

namespace {

void write_map_fields(json& doc, const TransportMap& map) {
  const MultiIndexSet& set = map.basis();
  doc["structure"] = to_string(set.structure());
  doc["family"] = to_string(map.family());
  doc["D"] = set.dim();
  doc["O"] = set.order();
  json indices = json::array();
  for (const auto& j : set.indices()) indices.push_back(j);
  doc["indices"] = std::move(indices);
  json w = json::array();
  for (Eigen::Index d = 0; d < map.weights().rows(); ++d) {
    json row = json::array();
    for (Eigen::Index k = 0; k < map.weights().cols(); ++k) row.push_back(map.weights()(d, k));
    w.push_back(std::move(row));
  }
  doc["W"] = std::move(w);
  if (map.monotone_validated()) doc["monotone_validated"] = true;
}

const json& field(const json& obj, const std::string& path, const char* name) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw SchemaError(path + "." + name, "missing field");
  return *it;
}

int int_field(const json& obj, const std::string& path, const char* name) {
  const json& v = field(obj, path, name);
  if (!v.is_number_integer()) throw SchemaError(path + "." + name, "expected an integer");
  return v.get<int>();
}

std::string string_field(const json& obj, const std::string& path, const char* name) {
  const json& v = field(obj, path, name);
  if (!v.is_string()) throw SchemaError(path + "." + name, "expected a string");
  return v.get<std::string>();
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

TransportMap read_map_fields(const json& obj, const std::string& path) {
  Structure structure;
  Family family;
  try {
    structure = parse_structure(string_field(obj, path, "structure"));
  } catch (const InvalidArgument& e) {
    throw SchemaError(path + ".structure", e.what());
  }
  try {
    family = parse_family(string_field(obj, path, "family"));
  } catch (const InvalidArgument& e) {
    throw SchemaError(path + ".family", e.what());
  }
  const int D = int_field(obj, path, "D");
  const int O = int_field(obj, path, "O");
  if (D < 1) throw SchemaError(path + ".D", "must be >= 1");
  if (O < 0) throw SchemaError(path + ".O", "must be >= 0");
  MultiIndexSet set;
  try {
    set = build_multi_index_set(structure, D, O);
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }

  const json& indices = field(obj, path, "indices");
  if (!indices.is_array() || static_cast<Eigen::Index>(indices.size()) != set.size()) {
    throw SchemaError(path + ".indices", "expected an array of " + std::to_string(set.size()) + " multi-indices");
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::string p = path + ".indices[" + std::to_string(k) + "]";
    const json& j = indices[k];
    if (!j.is_array() || j.size() != static_cast<std::size_t>(D)) {
      throw SchemaError(p, "expected " + std::to_string(D) + " exponents");
    }
    for (std::size_t a = 0; a < j.size(); ++a) {
      if (!j[a].is_number_integer() || j[a].get<int>() != set.index(static_cast<Eigen::Index>(k))[a]) {
        throw SchemaError(p, "does not match the canonical " + to_string(structure) + " index set");
      }
    }
  }

  const json& w = field(obj, path, "W");
  if (!w.is_array() || w.size() != static_cast<std::size_t>(D)) {
    throw SchemaError(path + ".W", "expected " + std::to_string(D) + " rows");
  }
  Eigen::MatrixXd weights(D, set.size());
  for (std::size_t d = 0; d < w.size(); ++d) {
    const std::string p = path + ".W[" + std::to_string(d) + "]";
    if (!w[d].is_array() || static_cast<Eigen::Index>(w[d].size()) != set.size()) {
      throw SchemaError(p, "expected " + std::to_string(set.size()) + " weights");
    }
    for (std::size_t k = 0; k < w[d].size(); ++k) {
      weights(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          number_at(w[d][k], p + "[" + std::to_string(k) + "]");
    }
  }
  try {
    TransportMap map(std::move(set), family, std::move(weights));
    const auto it = obj.find("monotone_validated");
    if (it != obj.end()) {
      if (!it->is_boolean()) throw SchemaError(path + ".monotone_validated", "expected a boolean");
      map.set_monotone_validated(it->get<bool>());
    }
    return map;
  } catch (const InvalidArgument& e) {
    throw SchemaError(path + ".W", e.what());
  }
}

json parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("not valid JSON: ") + e.what());
  }
  const int version = int_field(doc, "$", "version");
  if (version != kMapFormatVersion) throw UnsupportedVersion(version);
  const json& stages = field(doc, "$", "stages");
  if (!stages.is_array()) throw SchemaError("$.stages", "expected an array");
  return doc;
}

}  // namespace

std::string serialize(const TransportMap& map) {
  json doc;
  doc["version"] = kMapFormatVersion;
  write_map_fields(doc, map);
  doc["stages"] = json::array();
  return doc.dump(1) + "\n";
}

std::string serialize(const SequentialMap& seq) {
  json doc;
  doc["version"] = kMapFormatVersion;
  doc["D"] = seq.dim();
  json stages = json::array();
  for (std::size_t t = 0; t < seq.size(); ++t) {
    json s;
    write_map_fields(s, seq.stage(t));
    const StageInfo& info = seq.info()[t];
    s["theta"] = info.theta;
    s["objective_train"] = info.objective_train;
    s["objective_holdout"] = info.objective_holdout;
    s["admm_iters"] = info.admm_iters;
    s["converged"] = info.converged;
    stages.push_back(std::move(s));
  }
  doc["stages"] = std::move(stages);
  return doc.dump(1) + "\n";
}

TransportMap deserialize_map(const std::string& text) {
  const json doc = parse_document(text);
  const json& stages = doc["stages"];
  if (stages.empty()) return read_map_fields(doc, "$");
  if (stages.size() == 1) return read_map_fields(stages[0], "$.stages[0]");
  throw SchemaError("$.stages", "document holds a sequence of " + std::to_string(stages.size()) +
                                    " maps, not a single map");
}

SequentialMap deserialize_sequence(const std::string& text) {
  const json doc = parse_document(text);
  const json& stages = doc["stages"];
  SequentialMap seq;
  if (stages.empty()) {
    seq.push_back(read_map_fields(doc, "$"));
    return seq;
  }
  for (std::size_t t = 0; t < stages.size(); ++t) {
    const std::string path = "$.stages[" + std::to_string(t) + "]";
    const json& s = stages[t];
    TransportMap map = read_map_fields(s, path);
    StageInfo info;
    info.theta = number_at(field(s, path, "theta"), path + ".theta");
    info.objective_train = number_at(field(s, path, "objective_train"), path + ".objective_train");
    info.objective_holdout = number_at(field(s, path, "objective_holdout"), path + ".objective_holdout");
    info.admm_iters = int_field(s, path, "admm_iters");
    const json& conv = field(s, path, "converged");
    if (!conv.is_boolean()) throw SchemaError(path + ".converged", "expected a boolean");
    info.converged = conv.get<bool>();
    if (!seq.empty() && map.dim() != seq.dim()) throw SchemaError(path + ".D", "stage dimensions differ");
    seq.push_back(std::move(map), info);
  }
  return seq;
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace otmap
