#include "thermoforge/notation.hpp"

#include <cctype>
#include <unordered_set>
#include <vector>

#include "thermoforge/errors.hpp"

namespace thermoforge::config {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Edge> run() {
    skip_ws();
    const std::size_t root_pos = pos_;
    if (read_label() != kTank) throw ParseError("notation must start with the tank label 0", root_pos);
    skip_ws();
    if (peek() != '(') throw ParseError("expected '(' after tank", pos_);
    branches(kTank);
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return std::move(edges_);
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Label read_label() {
    skip_ws();
    const std::size_t start = pos_;
    long long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1'000'000) throw ParseError("label too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= text_.size()) throw ParseError("unexpected end of input, expected a label", pos_);
      throw ParseError(std::string("expected a label, found '") + text_[pos_] + "'", pos_);
    }
    return static_cast<Label>(value);
  }

  Label device_label() {
    skip_ws();
    const std::size_t at = pos_;
    Label l = read_label();
    if (l == kTank) throw ParseError("label 0 is reserved for the tank", at);
    if (!seen_.insert(l).second) throw ValidationError("duplicate label " + std::to_string(l) + " at position " + std::to_string(at));
    return l;
  }

  // One or more "(chain)" groups hanging from `parent`.
  void branches(Label parent) {
    skip_ws();
    while (peek() == '(') {
      ++pos_;
      chain(parent);
      skip_ws();
      if (peek() != ')') {
        if (pos_ >= text_.size()) throw ParseError("unbalanced '(': missing ')'", pos_);
        throw ParseError(std::string("expected ')' or ',', found '") + text_[pos_] + "'", pos_);
      }
      ++pos_;
      skip_ws();
    }
  }

  void chain(Label parent) {
    Label prev = parent;
    for (;;) {
      Label cur = device_label();
      edges_.emplace_back(prev, cur);
      prev = cur;
      skip_ws();
      if (peek() != ',') break;
      ++pos_;
    }
    if (peek() == '(') branches(prev);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Edge> edges_;
  std::unordered_set<Label> seen_;
};

void write_chain(const ConfigGraph& g, Label node, std::string& out) {
  out += std::to_string(node);
  auto ch = g.children(node);
  if (ch.size() == 1) {
    out += ',';
    write_chain(g, ch.front(), out);
  } else {
    for (Label c : ch) {
      out += " (";
      write_chain(g, c, out);
      out += ')';
    }
  }
}

}  // namespace

ConfigGraph parse_notation(std::string_view text) {
  auto edges = Parser(text).run();
  return ConfigGraph::from_edges(edges);
}

std::string serialize(const ConfigGraph& graph) {
  std::string out = "0";
  for (Label c : graph.children(kTank)) {
    out += " (";
    write_chain(graph, c, out);
    out += ')';
  }
  return out;
}

nlohmann::json to_json(const ConfigGraph& graph) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [p, c] : graph.edges()) edges.push_back({p, c});
  return {{"edges", edges}};
}

ConfigGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("edges") || !j["edges"].is_array())
    throw ValidationError("graph JSON must be an object with an \"edges\" array");
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ValidationError("each edge must be a [parent, child] integer pair");
    edges.emplace_back(e[0].get<Label>(), e[1].get<Label>());
  }
  return ConfigGraph::from_edges(edges);
}

}  // namespace thermoforge::config
