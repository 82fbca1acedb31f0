#include <cmath>

#include <json.hpp>

#include "convodyn/error.hpp"
#include "convodyn/io.hpp"
#include "convodyn/model.hpp"

namespace convodyn::model {

using nlohmann::json;

std::string serialize_model(const TreeEnsemble& ensemble) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["base_score"] = ensemble.base_score;
  doc["learning_rate"] = ensemble.learning_rate;
  doc["schema"] = ensemble.schema;
  json trees = json::array();
  for (const auto& tree : ensemble.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      json jn;
      if (n.is_leaf()) {
        jn["leaf"] = n.leaf;
      } else {
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["default"] = n.default_left ? "left" : "right";
        jn["left"] = n.left;
        jn["right"] = n.right;
      }
      jn["cover"] = n.cover;
      nodes.push_back(std::move(jn));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1) + "\n";
}

namespace {

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string("model field '") + what + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string("model field '") + what + "' is not finite");
  return v;
}

Tree parse_tree(const json& jt, std::size_t n_features) {
  const auto& jnodes = jt.at("nodes");
  if (!jnodes.is_array() || jnodes.empty()) throw ParseError("tree must have at least one node");
  Tree tree;
  const int count = static_cast<int>(jnodes.size());
  for (int i = 0; i < count; ++i) {
    const json& jn = jnodes[static_cast<std::size_t>(i)];
    TreeNode n;
    n.cover = jn.contains("cover") ? finite_number(jn["cover"], "cover") : 0.0;
    if (jn.contains("leaf")) {
      n.leaf = finite_number(jn["leaf"], "leaf");
    } else {
      n.feature = jn.at("feature").get<int>();
      n.threshold = finite_number(jn.at("threshold"), "threshold");
      const std::string dir = jn.at("default").get<std::string>();
      if (dir != "left" && dir != "right") throw ParseError("node default must be 'left' or 'right'");
      n.default_left = dir == "left";
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features) {
        throw ParseError("node feature index out of range");
      }
      // Children always come after their parent, which rules out cycles.
      if (n.left <= i || n.right <= i || n.left >= count || n.right >= count || n.left == n.right) {
        throw ParseError("node child index out of range");
      }
    }
    tree.nodes.push_back(n);
  }
  return tree;
}

}  // namespace

TreeEnsemble parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("corrupt model file: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("format_version")) throw ParseError("model file lacks format_version");
    const auto& version = doc["format_version"];
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
      throw ParseError("unsupported model format_version " + version.dump() + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
    }
    TreeEnsemble ensemble;
    ensemble.base_score = finite_number(doc.at("base_score"), "base_score");
    ensemble.learning_rate = finite_number(doc.at("learning_rate"), "learning_rate");
    ensemble.schema = doc.at("schema").get<std::vector<std::string>>();
    for (const auto& jt : doc.at("trees")) ensemble.trees.push_back(parse_tree(jt, ensemble.schema.size()));
    return ensemble;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TreeEnsemble& ensemble, const std::filesystem::path& path) {
  io::write_atomic(path, serialize_model(ensemble));
}

TreeEnsemble load_model(const std::filesystem::path& path) { return parse_model(io::read_file(path)); }

}  // namespace convodyn::model
