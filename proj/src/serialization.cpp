// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key, "missing");
  return *it;
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
  return v.get<int>();
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where, "expected a number");
  return v.get<double>();
}

}  // namespace

std::string save(const VictimTree& tree) {
  json doc;
  doc["format"] = kTreeFormat;
  doc["task"] = to_string(tree.task());
  doc["features"] = json::array();
  for (const FeatureSpec& f : tree.features()) {
    doc["features"].push_back({{"index", f.index}, {"min", f.min}, {"max", f.max}});
  }
  doc["nodes"] = json::array();
  for (const VictimNode& n : tree.nodes()) {
    doc["nodes"].push_back({{"id", n.id},
                            {"feature", n.feature},
                            {"threshold", n.threshold},
                            {"left", n.left},
                            {"right", n.right}});
  }
  doc["leaves"] = json::array();
  for (const VictimLeaf& l : tree.leaves()) {
    json label = l.label.is_regression() ? json(l.label.value()) : json(l.label.class_id());
    doc["leaves"].push_back({{"id", l.id}, {"label", label}});
  }
  doc["root"] = tree.root();
  return doc.dump(2);
}

VictimTree load(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("document", e.what());
  }
  if (!doc.is_object()) throw ParseError("document", "expected a JSON object");

  const json& format = require(doc, "format", "document");
  if (!format.is_string() || format.get<std::string>() != kTreeFormat) {
    throw ParseError("format", "expected \"" + std::string(kTreeFormat) + "\"");
  }
  const json& task_json = require(doc, "task", "document");
  if (!task_json.is_string()) throw ParseError("task", "expected a string");
  Task task;
  try {
    task = task_from_string(task_json.get<std::string>());
  } catch (const ValidationError& e) {
    throw ParseError("task", e.what());
  }

  const json& features_json = require(doc, "features", "document");
  if (!features_json.is_array()) throw ParseError("features", "expected an array");
  std::vector<FeatureSpec> features;
  for (std::size_t i = 0; i < features_json.size(); ++i) {
    const std::string where = "features[" + std::to_string(i) + "]";
    const json& f = features_json[i];
    if (!f.is_object()) throw ParseError(where, "expected an object");
    features.push_back({as_int(require(f, "index", where), where + ".index"),
                        as_double(require(f, "min", where), where + ".min"),
                        as_double(require(f, "max", where), where + ".max")});
  }

  const json& nodes_json = require(doc, "nodes", "document");
  if (!nodes_json.is_array()) throw ParseError("nodes", "expected an array");
  const json& leaves_json = require(doc, "leaves", "document");
  if (!leaves_json.is_array()) throw ParseError("leaves", "expected an array");

  std::set<int> ids;
  std::vector<VictimNode> nodes;
  for (std::size_t i = 0; i < nodes_json.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& n = nodes_json[i];
    if (!n.is_object()) throw ParseError(where, "expected an object");
    VictimNode node{as_int(require(n, "id", where), where + ".id"),
                    as_int(require(n, "feature", where), where + ".feature"),
                    as_double(require(n, "threshold", where), where + ".threshold"),
                    as_int(require(n, "left", where), where + ".left"),
                    as_int(require(n, "right", where), where + ".right")};
    if (!ids.insert(node.id).second) throw ParseError(where + ".id", "duplicate node id");
    if (node.feature < 0 || node.feature >= static_cast<int>(features.size())) {
      throw ParseError(where + ".feature", "feature index out of range");
    }
    nodes.push_back(node);
  }
  std::vector<VictimLeaf> leaves;
  for (std::size_t i = 0; i < leaves_json.size(); ++i) {
    const std::string where = "leaves[" + std::to_string(i) + "]";
    const json& l = leaves_json[i];
    if (!l.is_object()) throw ParseError(where, "expected an object");
    const int id = as_int(require(l, "id", where), where + ".id");
    if (!ids.insert(id).second) throw ParseError(where + ".id", "duplicate node id");
    const json& label = require(l, "label", where);
    if (task == Task::kRegression) {
      leaves.push_back({id, LeafLabel::regression(as_double(label, where + ".label"))});
    } else {
      if (!label.is_number_integer()) throw ParseError(where + ".label", "expected a class id");
      leaves.push_back({id, LeafLabel::classification(label.get<std::int64_t>())});
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!ids.count(nodes[i].left)) throw ParseError(where + ".left", "dangling child");
    if (!ids.count(nodes[i].right)) throw ParseError(where + ".right", "dangling child");
  }
  const int root = as_int(require(doc, "root", "document"), "root");
  if (!ids.count(root)) throw ParseError("root", "dangling root id");

  return VictimTree(task, std::move(features), std::move(nodes), std::move(leaves), root);
}

VictimTree load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("file", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

void save_file(const VictimTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << save(tree) << '\n';
}

}  // namespace barkbeetle
