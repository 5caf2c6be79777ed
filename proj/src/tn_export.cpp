#include "mlt/tn_export.hpp"

#include <json.hpp>

#include <map>
#include <set>

namespace mlt::tn {

namespace {

const Node& find_node(const NetworkSpec& spec, const std::string& name) {
  for (const auto& n : spec.nodes)
    if (n.name == name) return n;
  throw SpecError("edge refers to unknown node '" + name + "'");
}

void check_endpoint(const Node& node, Index mode) {
  if (mode < 1 || mode > static_cast<Index>(node.modes.size()))
    throw SpecError("mode " + std::to_string(mode) + " out of range for node '" + node.name + "'");
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string edge_label(const ModeLabel& m) { return m.name + "=" + std::to_string(m.dim); }

std::vector<ModeLabel> labels(const std::string& prefix, const Shape& shape, Index first = 1) {
  std::vector<ModeLabel> out;
  for (std::size_t k = 0; k < shape.size(); ++k)
    out.push_back({prefix + std::to_string(first + static_cast<Index>(k)), shape[k]});
  return out;
}

std::set<std::pair<std::string, Index>> used_modes(const NetworkSpec& spec) {
  std::set<std::pair<std::string, Index>> used;
  for (const auto& e : spec.edges) {
    used.insert({e.node_a, e.mode_a});
    used.insert({e.node_b, e.mode_b});
  }
  return used;
}

}  // namespace

void validate(const NetworkSpec& spec) {
  if (spec.nodes.empty()) throw SpecError("network spec has no nodes");
  std::set<std::string> names;
  for (const auto& n : spec.nodes) {
    if (n.name.empty()) throw SpecError("node with empty name");
    if (n.name.find_first_of("\"\\\n") != std::string::npos)
      throw SpecError("node name '" + n.name + "' contains quotes, backslashes or newlines");
    if (!names.insert(n.name).second) throw SpecError("duplicate node name '" + n.name + "'");
    for (const auto& m : n.modes)
      if (m.dim < 1) throw SpecError("mode '" + m.name + "' of node '" + n.name + "' has non-positive size");
  }
  std::set<std::pair<std::string, Index>> used;
  for (const auto& e : spec.edges) {
    const Node& a = find_node(spec, e.node_a);
    const Node& b = find_node(spec, e.node_b);
    check_endpoint(a, e.mode_a);
    check_endpoint(b, e.mode_b);
    if (e.node_a == e.node_b && e.mode_a == e.mode_b) throw SpecError("edge joins a mode to itself");
    if (!used.insert({e.node_a, e.mode_a}).second || !used.insert({e.node_b, e.mode_b}).second)
      throw SpecError("a mode takes part in more than one edge");
    const Index da = a.modes[static_cast<std::size_t>(e.mode_a - 1)].dim;
    const Index db = b.modes[static_cast<std::size_t>(e.mode_b - 1)].dim;
    if (da != db)
      throw SpecError("edge " + e.node_a + ":" + std::to_string(e.mode_a) + " -- " + e.node_b + ":" +
                      std::to_string(e.mode_b) + " joins sizes " + std::to_string(da) + " and " + std::to_string(db));
  }
}

Index free_edge_count(const NetworkSpec& spec) {
  Index total = 0;
  for (const auto& n : spec.nodes) total += static_cast<Index>(n.modes.size());
  return total - 2 * static_cast<Index>(spec.edges.size());
}

std::string to_dot(const NetworkSpec& spec) {
  validate(spec);
  const auto used = used_modes(spec);
  std::string out = "graph " + quoted(spec.name) + " {\n";
  out += "  node [fontname=\"Helvetica\"];\n";
  out += "  edge [fontname=\"Helvetica\", fontsize=10];\n";
  for (const auto& n : spec.nodes) {
    out += "  " + quoted(n.name) + " [shape=" + (n.kind == NodeKind::tensor ? "circle" : "box") +
           ", label=" + quoted(n.name) + "];\n";
  }
  for (const auto& n : spec.nodes)
    for (std::size_t m = 0; m < n.modes.size(); ++m)
      if (!used.contains({n.name, static_cast<Index>(m + 1)}))
        out += "  " + quoted(n.name + ":free:" + std::to_string(m + 1)) + " [shape=point, style=invis];\n";
  for (const auto& e : spec.edges) {
    const Node& a = find_node(spec, e.node_a);
    out += "  " + quoted(e.node_a) + " -- " + quoted(e.node_b) +
           " [label=" + quoted(edge_label(a.modes[static_cast<std::size_t>(e.mode_a - 1)])) +
           ", style=" + (e.kind == EdgeKind::contraction ? "solid" : "dashed") + "];\n";
  }
  for (const auto& n : spec.nodes)
    for (std::size_t m = 0; m < n.modes.size(); ++m)
      if (!used.contains({n.name, static_cast<Index>(m + 1)}))
        out += "  " + quoted(n.name) + " -- " + quoted(n.name + ":free:" + std::to_string(m + 1)) +
               " [label=" + quoted(edge_label(n.modes[m])) + "];\n";
  out += "}\n";
  return out;
}

NetworkSpec spec_from_contraction(const Shape& a_shape, const Shape& b_shape, const ModePairing& pairing) {
  if (pairing.modes_a.size() != pairing.modes_b.size()) throw SpecError("mode pairing lists have different lengths");
  NetworkSpec spec;
  spec.name = "contraction";
  spec.nodes.push_back({"A", NodeKind::tensor, labels("I", a_shape)});
  spec.nodes.push_back({"B", NodeKind::tensor, labels("J", b_shape)});
  for (std::size_t p = 0; p < pairing.modes_a.size(); ++p) {
    spec.edges.push_back({"A", pairing.modes_a[p], "B", pairing.modes_b[p], EdgeKind::contraction});
    // the joined B mode carries A's label
    const Index mb = pairing.modes_b[p];
    const Index ma = pairing.modes_a[p];
    if (mb >= 1 && mb <= static_cast<Index>(b_shape.size()) && ma >= 1 && ma <= static_cast<Index>(a_shape.size()))
      spec.nodes[1].modes[static_cast<std::size_t>(mb - 1)].name = spec.nodes[0].modes[static_cast<std::size_t>(ma - 1)].name;
  }
  validate(spec);
  return spec;
}

NetworkSpec spec_from_einstein(const Shape& a_shape, const Shape& b_shape, Index n) {
  const auto na = static_cast<Index>(a_shape.size());
  if (n < 0 || n > na || n > static_cast<Index>(b_shape.size()))
    throw SpecError("Einstein product over " + std::to_string(n) + " modes does not fit the operands");
  ModePairing pairing;
  for (Index k = 1; k <= n; ++k) {
    pairing.modes_a.push_back(na - n + k);
    pairing.modes_b.push_back(k);
  }
  auto spec = spec_from_contraction(a_shape, b_shape, pairing);
  spec.name = "einstein";
  return spec;
}

NetworkSpec spec_from_convolution(const Shape& h_frame_shape, Index input_order) {
  const auto order = static_cast<Index>(h_frame_shape.size());
  if (input_order < 0 || input_order > order) throw SpecError("input order does not fit the system frame shape");
  const Index output_order = order - input_order;
  NetworkSpec spec;
  spec.name = "convolution";
  Node h{"H[k]", NodeKind::function_tensor, {}};
  Node x{"X[k]", NodeKind::function_tensor, {}};
  for (Index k = 0; k < order; ++k) {
    const bool is_out = k < output_order;
    h.modes.push_back({(is_out ? "J" : "I") + std::to_string(is_out ? k + 1 : k - output_order + 1),
                       h_frame_shape[static_cast<std::size_t>(k)]});
    if (!is_out) x.modes.push_back(h.modes.back());
  }
  spec.nodes.push_back(std::move(h));
  spec.nodes.push_back(std::move(x));
  for (Index k = 1; k <= input_order; ++k)
    spec.edges.push_back({"H[k]", output_order + k, "X[k]", k, EdgeKind::convolution});
  validate(spec);
  return spec;
}

NetworkSpec spec_from_svd(const Shape& row_shape, const Shape& col_shape) {
  const auto n = static_cast<Index>(row_shape.size());
  const auto m = static_cast<Index>(col_shape.size());
  NetworkSpec spec;
  spec.name = "svd";
  auto u = labels("I", row_shape);
  for (auto l : labels("R", row_shape)) u.push_back(l);
  auto d = labels("R", row_shape);
  for (auto l : labels("C", col_shape)) d.push_back(l);
  auto vh = labels("C", col_shape);
  for (auto l : labels("J", col_shape)) vh.push_back(l);
  spec.nodes.push_back({"U", NodeKind::tensor, std::move(u)});
  spec.nodes.push_back({"D", NodeKind::tensor, std::move(d)});
  spec.nodes.push_back({"V^H", NodeKind::tensor, std::move(vh)});
  for (Index k = 1; k <= n; ++k) spec.edges.push_back({"U", n + k, "D", k, EdgeKind::contraction});
  for (Index k = 1; k <= m; ++k) spec.edges.push_back({"D", n + k, "V^H", k, EdgeKind::contraction});
  validate(spec);
  return spec;
}

namespace {

using nlohmann::json;

Shape shape_field(const json& j, const char* key) {
  if (!j.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array()) throw SpecError(std::string("field '") + key + "' must be an array of sizes");
  Shape s;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw SpecError(std::string("field '") + key + "' must hold integers");
    s.push_back(e.get<Index>());
  }
  return s;
}

Index int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw SpecError(std::string("missing integer field '") + key + "'");
  return j.at(key).get<Index>();
}

NetworkSpec parse_graph(const json& j) {
  NetworkSpec spec;
  if (j.contains("name")) spec.name = j.at("name").get<std::string>();
  if (!j.contains("nodes") || !j.at("nodes").is_array()) throw SpecError("graph spec needs a 'nodes' array");
  for (const auto& jn : j.at("nodes")) {
    Node n;
    n.name = jn.at("name").get<std::string>();
    const std::string kind = jn.value("kind", std::string("tensor"));
    if (kind == "tensor")
      n.kind = NodeKind::tensor;
    else if (kind == "function")
      n.kind = NodeKind::function_tensor;
    else
      throw SpecError("unknown node kind '" + kind + "'");
    for (const auto& jm : jn.at("modes")) n.modes.push_back({jm.at("name").get<std::string>(), jm.at("dim").get<Index>()});
    spec.nodes.push_back(std::move(n));
  }
  if (j.contains("edges")) {
    for (const auto& je : j.at("edges")) {
      Edge e;
      e.node_a = je.at("a").get<std::string>();
      e.mode_a = je.at("a_mode").get<Index>();
      e.node_b = je.at("b").get<std::string>();
      e.mode_b = je.at("b_mode").get<Index>();
      const std::string kind = je.value("kind", std::string("contraction"));
      if (kind == "contraction")
        e.kind = EdgeKind::contraction;
      else if (kind == "convolution")
        e.kind = EdgeKind::convolution;
      else
        throw SpecError("unknown edge kind '" + kind + "'");
      spec.edges.push_back(std::move(e));
    }
  }
  validate(spec);
  return spec;
}

}  // namespace

NetworkSpec parse_network_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("network spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.empty()) throw SpecError("network spec is empty");
  try {
    if (j.contains("contraction")) {
      const auto& c = j.at("contraction");
      ModePairing p;
      p.modes_a = shape_field(c.at("pairing"), "a");
      p.modes_b = shape_field(c.at("pairing"), "b");
      return spec_from_contraction(shape_field(c, "a_shape"), shape_field(c, "b_shape"), p);
    }
    if (j.contains("einstein")) {
      const auto& c = j.at("einstein");
      return spec_from_einstein(shape_field(c, "a_shape"), shape_field(c, "b_shape"), int_field(c, "n"));
    }
    if (j.contains("convolution")) {
      const auto& c = j.at("convolution");
      return spec_from_convolution(shape_field(c, "h_shape"), int_field(c, "input_order"));
    }
    if (j.contains("svd")) {
      const auto& c = j.at("svd");
      return spec_from_svd(shape_field(c, "row_shape"), shape_field(c, "col_shape"));
    }
    return parse_graph(j);
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed network spec: ") + e.what());
  }
}

}  // namespace mlt::tn
