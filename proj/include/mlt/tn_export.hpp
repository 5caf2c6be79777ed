#pragma once

#include "mlt/tensor.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mlt::tn {

// Tensor-network diagrams: one node per tensor, one edge per mode. Connected
// modes are contracted (solid edge) or convolved (dashed edge); modes left
// unconnected are free edges and make up the order of the result.

enum class NodeKind { tensor, function_tensor };
enum class EdgeKind { contraction, convolution };

struct ModeLabel {
  std::string name;
  Index dim = 1;
};

struct Node {
  std::string name;
  NodeKind kind = NodeKind::tensor;
  std::vector<ModeLabel> modes;
};

/// Connects mode `mode_a` (1-based) of node `node_a` with mode `mode_b` of `node_b`.
struct Edge {
  std::string node_a;
  Index mode_a = 1;
  std::string node_b;
  Index mode_b = 1;
  EdgeKind kind = EdgeKind::contraction;
};

struct NetworkSpec {
  std::string name = "network";
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};

/// Thrown for malformed network specs.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checks node names, mode references, dimension agreement on every edge and
/// that no mode takes part in more than one edge.
void validate(const NetworkSpec& spec);

/// Number of modes not attached to any edge.
Index free_edge_count(const NetworkSpec& spec);

/// Graphviz text. Nodes appear in declaration order, then the edges in spec
/// order, then the free edges node by node; identical specs give identical
/// bytes.
std::string to_dot(const NetworkSpec& spec);

/// Two-node network of {A, B}_{pairing}.
NetworkSpec spec_from_contraction(const Shape& a_shape, const Shape& b_shape, const ModePairing& pairing);

/// A *_n B: trailing n modes of A joined to the leading n modes of B.
NetworkSpec spec_from_einstein(const Shape& a_shape, const Shape& b_shape, Index n);

/// Compact contracted-convolution diagram: function tensors H and X with
/// dashed edges between the input modes of H and the modes of X.
NetworkSpec spec_from_convolution(const Shape& h_frame_shape, Index input_order);

/// Chain U -- D -- V^H of the SVD for the given row and column shapes.
NetworkSpec spec_from_svd(const Shape& row_shape, const Shape& col_shape);

/// Parses a JSON network description. Either an explicit {"nodes": [...],
/// "edges": [...]} graph or one of the generators "contraction", "einstein",
/// "convolution", "svd".
NetworkSpec parse_network_spec(std::string_view json_text);

}  // namespace mlt::tn
