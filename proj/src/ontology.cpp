#include "sac/ontology.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "sac/error.hpp"
#include "sac/xml.hpp"

namespace sac {

std::string_view to_string(OntologyKind kind) {
  switch (kind) {
    case OntologyKind::SO: return "SO";
    case OntologyKind::OO: return "OO";
    case OntologyKind::AO: return "AO";
    case OntologyKind::AtO: return "AtO";
  }
  return "SO";
}

std::optional<OntologyKind> parse_ontology_kind(std::string_view text) {
  if (text == "SO") return OntologyKind::SO;
  if (text == "OO") return OntologyKind::OO;
  if (text == "AO") return OntologyKind::AO;
  if (text == "AtO") return OntologyKind::AtO;
  return std::nullopt;
}

bool parse_equivalence_flag(std::string_view text) {
  return text == "Enabled" || text == "Enable";
}

// ---------------------------------------------------------------------------
// OntologyGraph queries

bool OntologyGraph::is_top(std::string_view id) const {
  return id == kTopConcept || (!top_alias_.empty() && id == top_alias_);
}

bool OntologyGraph::contains(std::string_view id) const {
  return is_top(id) || nodes_.find(id) != nodes_.end();
}

std::optional<NodeKind> OntologyGraph::node_kind(std::string_view id) const {
  if (is_top(id)) return NodeKind::Concept;
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return std::nullopt;
  return it->second;
}

std::size_t OntologyGraph::index_of(std::string_view id) const {
  if (is_top(id)) return 0;
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownConcept, "'" + std::string(id) + "' is not a concept of " +
                                               std::string(to_string(kind_)));
  }
  return it->second;
}

const std::string& OntologyGraph::name_of(std::size_t index) const {
  return names_[index];
}

bool OntologyGraph::subsumes(std::string_view ancestor,
                             std::string_view descendant) const {
  const auto a = index_of(ancestor);
  const auto d = index_of(descendant);
  return ancestors_[d][a];
}

std::vector<std::string> OntologyGraph::isa_path(std::string_view ancestor,
                                                 std::string_view descendant) const {
  const auto a = index_of(ancestor);
  const auto d = index_of(descendant);
  if (!ancestors_[d][a]) return {};
  std::vector<std::size_t> prev(names_.size(), names_.size());
  std::deque<std::size_t> queue{d};
  prev[d] = d;
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (cur == a) break;
    for (auto p : parents_[cur]) {
      if (prev[p] == names_.size()) {
        prev[p] = cur;
        queue.push_back(p);
      }
    }
  }
  std::vector<std::string> path;
  for (auto cur = a;; cur = prev[cur]) {
    path.push_back(names_[cur]);
    if (cur == d) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::set<std::string> OntologyGraph::inherited_rights_roles(std::string_view role) const {
  const auto start = index_of(role);
  std::vector<bool> seen(names_.size(), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  std::set<std::string> out;
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    out.insert(names_[cur]);
    for (auto j : juniors_[cur]) {
      if (!seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return out;
}

std::set<std::string> OntologyGraph::equivalence_class(std::string_view id) const {
  const auto idx = index_of(id);
  std::set<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (equiv_component_[i] == equiv_component_[idx]) out.insert(names_[i]);
  }
  return out;
}

bool OntologyGraph::operator==(const OntologyGraph& other) const {
  return kind_ == other.kind_ && top_alias_ == other.top_alias_ &&
         nodes_ == other.nodes_ && isa_ == other.isa_ &&
         inherits_ == other.inherits_ && equiv_ == other.equiv_ && arcs_ == other.arcs_;
}

// ---------------------------------------------------------------------------
// Builder

OntologyBuilder::OntologyBuilder(OntologyKind kind) : kind_(kind) {}

OntologyBuilder& OntologyBuilder::top_alias(std::string alias) {
  top_alias_ = std::move(alias);
  return *this;
}
OntologyBuilder& OntologyBuilder::concept_node(std::string id) {
  nodes_.push_back({std::move(id), NodeKind::Concept, std::nullopt});
  return *this;
}
OntologyBuilder& OntologyBuilder::individual(std::string id) {
  nodes_.push_back({std::move(id), NodeKind::Individual, std::nullopt});
  return *this;
}
OntologyBuilder& OntologyBuilder::isa(std::string child, std::string parent) {
  isa_.push_back({std::move(child), std::move(parent), std::nullopt});
  return *this;
}
OntologyBuilder& OntologyBuilder::inherits(std::string junior, std::string senior) {
  inherits_.push_back({std::move(junior), std::move(senior), std::nullopt});
  return *this;
}
OntologyBuilder& OntologyBuilder::equiv(std::string a, std::string b) {
  equiv_.push_back({std::move(a), std::move(b), std::nullopt});
  return *this;
}
OntologyBuilder& OntologyBuilder::arc(std::string from, std::string label, std::string to) {
  arcs_.push_back({std::move(from), std::move(label), std::move(to)});
  return *this;
}

namespace {

// Returns one cycle (first node repeated at the end) or an empty vector.
// Visits nodes and successors in index order so the reported cycle is
// independent of declaration order.
std::vector<std::size_t> find_cycle(const std::vector<std::vector<std::size_t>>& succ) {
  enum class Color { White, Grey, Black };
  std::vector<Color> color(succ.size(), Color::White);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;

  std::function<bool(std::size_t)> visit = [&](std::size_t n) {
    color[n] = Color::Grey;
    stack.push_back(n);
    for (auto m : succ[n]) {
      if (color[m] == Color::Grey) {
        auto it = std::find(stack.begin(), stack.end(), m);
        cycle.assign(it, stack.end());
        cycle.push_back(m);
        return true;
      }
      if (color[m] == Color::White && visit(m)) return true;
    }
    stack.pop_back();
    color[n] = Color::Black;
    return false;
  };
  for (std::size_t n = 0; n < succ.size(); ++n) {
    if (color[n] == Color::White && visit(n)) break;
  }
  return cycle;
}

}  // namespace

OntologyGraph OntologyBuilder::build() const {
  OntologyGraph g;
  g.kind_ = kind_;
  g.top_alias_ = top_alias_ == kTopConcept ? std::string() : top_alias_;

  for (const auto& n : nodes_) {
    if (n.id.empty()) {
      throw Error(ErrorCode::InvalidDocument, "node id must not be empty", n.where);
    }
    if (g.is_top(n.id)) {
      throw Error(ErrorCode::DuplicateId,
                  "'" + n.id + "' is reserved for the top concept", n.where);
    }
    if (!g.nodes_.emplace(n.id, n.kind).second) {
      throw Error(ErrorCode::DuplicateId, "'" + n.id + "' declared twice", n.where);
    }
  }

  g.names_.push_back(g.top_alias_.empty() ? std::string(kTopConcept) : g.top_alias_);
  for (const auto& [id, kind] : g.nodes_) {
    g.index_.emplace(id, g.names_.size());
    g.names_.push_back(id);
  }
  const std::size_t n = g.names_.size();

  auto canonical = [&](const std::string& id) {
    return g.is_top(id) ? g.names_[0] : id;
  };
  auto require_known = [&](const std::string& id, const char* what,
                           const std::optional<SourceLocation>& where) {
    if (!g.contains(id)) {
      throw Error(ErrorCode::DanglingReference,
                  std::string(what) + " endpoint '" + id + "' is not declared", where);
    }
  };

  for (const auto& e : isa_) {
    require_known(e.a, "isa", e.where);
    require_known(e.b, "isa", e.where);
    if (g.is_top(e.a)) {
      throw Error(ErrorCode::InvalidDocument, "the top concept cannot have a parent",
                  e.where);
    }
    if (g.node_kind(e.a) == NodeKind::Individual &&
        g.node_kind(e.b) == NodeKind::Individual) {
      throw Error(ErrorCode::InvalidIndividualEdge,
                  "individual '" + e.a + "' cannot be an instance of individual '" + e.b + "'",
                  e.where);
    }
    g.isa_.emplace(e.a, canonical(e.b));
  }
  if (!inherits_.empty() && kind_ != OntologyKind::SO) {
    throw Error(ErrorCode::WrongOntologyTag, "role inheritance is only allowed in SO",
                inherits_.front().where);
  }
  for (const auto& e : inherits_) {
    require_known(e.a, "inherits", e.where);
    require_known(e.b, "inherits", e.where);
    g.inherits_.emplace(canonical(e.a), canonical(e.b));
  }
  if (!equiv_.empty() && kind_ != OntologyKind::AtO) {
    throw Error(ErrorCode::WrongOntologyTag, "equivalence is only allowed in AtO",
                equiv_.front().where);
  }
  for (const auto& e : equiv_) {
    require_known(e.a, "equiv", e.where);
    require_known(e.b, "equiv", e.where);
    auto a = canonical(e.a);
    auto b = canonical(e.b);
    if (a == b) continue;
    g.equiv_.emplace(std::min(a, b), std::max(a, b));
  }
  for (const auto& arc : arcs_) {
    require_known(arc.from, "arc", std::nullopt);
    require_known(arc.to, "arc", std::nullopt);
    g.arcs_.insert({canonical(arc.from), arc.label, canonical(arc.to)});
  }

  // is-a structure
  g.parents_.assign(n, {});
  for (const auto& [child, parent] : g.isa_) {
    g.parents_[g.index_of(child)].push_back(g.index_of(parent));
  }
  auto describe_cycle = [&](const std::vector<std::size_t>& cycle) {
    std::string out;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) out += " -> ";
      out += g.names_[cycle[i]];
    }
    return out;
  };
  if (auto cycle = find_cycle(g.parents_); !cycle.empty()) {
    throw Error(ErrorCode::CycleDetected, "is-a cycle " + describe_cycle(cycle));
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (g.parents_[i].empty()) g.parents_[i].push_back(0);
  }

  g.ancestors_.assign(n, {});
  std::function<const std::vector<bool>&(std::size_t)> ancestors =
      [&](std::size_t i) -> const std::vector<bool>& {
    if (!g.ancestors_[i].empty()) return g.ancestors_[i];
    std::vector<bool> acc(n, false);
    acc[i] = true;
    for (auto p : g.parents_[i]) {
      const auto& up = ancestors(p);
      for (std::size_t k = 0; k < n; ++k) {
        if (up[k]) acc[k] = true;
      }
    }
    g.ancestors_[i] = std::move(acc);
    return g.ancestors_[i];
  };
  for (std::size_t i = 0; i < n; ++i) ancestors(i);

  // role inheritance: senior -> juniors whose rights it holds
  g.juniors_.assign(n, {});
  for (const auto& [junior, senior] : g.inherits_) {
    g.juniors_[g.index_of(senior)].push_back(g.index_of(junior));
  }
  if (auto cycle = find_cycle(g.juniors_); !cycle.empty()) {
    throw Error(ErrorCode::CycleDetected, "inheritance cycle " + describe_cycle(cycle));
  }

  // equivalence components (union-find)
  g.equiv_component_.resize(n);
  std::iota(g.equiv_component_.begin(), g.equiv_component_.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (g.equiv_component_[x] != x) {
      g.equiv_component_[x] = g.equiv_component_[g.equiv_component_[x]];
      x = g.equiv_component_[x];
    }
    return x;
  };
  for (const auto& [a, b] : g.equiv_) {
    auto ra = find(g.index_of(a));
    auto rb = find(g.index_of(b));
    if (ra != rb) g.equiv_component_[std::max(ra, rb)] = std::min(ra, rb);
  }
  for (std::size_t i = 0; i < n; ++i) g.equiv_component_[i] = find(i);

  return g;
}

// ---------------------------------------------------------------------------
// Document loading

OntologyGraph load_ontology(std::string_view document, std::optional<OntologyKind> expected) {
  const auto root = xml::parse(document);
  if (root.name != "ontology") {
    throw Error(ErrorCode::UnknownElement,
                "expected <ontology> root, found <" + root.name + ">", root.where);
  }
  const auto& kind_text = root.required_attribute("kind");
  const auto kind = parse_ontology_kind(kind_text);
  if (!kind) {
    throw Error(ErrorCode::WrongOntologyTag, "unknown ontology kind '" + kind_text + "'",
                root.where);
  }
  if (expected && *expected != *kind) {
    throw Error(ErrorCode::WrongOntologyTag,
                "document declares kind " + kind_text + " but " +
                    std::string(to_string(*expected)) + " was expected",
                root.where);
  }

  OntologyBuilder b(*kind);
  if (const auto* top = root.find_attribute("top")) b.top_alias(*top);
  for (const auto& el : root.children) {
    if (el.name == "concept") {
      b.nodes_.push_back({el.required_attribute("id"), NodeKind::Concept, el.where});
    } else if (el.name == "individual") {
      b.nodes_.push_back({el.required_attribute("id"), NodeKind::Individual, el.where});
    } else if (el.name == "isa") {
      b.isa_.push_back(
          {el.required_attribute("child"), el.required_attribute("parent"), el.where});
    } else if (el.name == "inherits") {
      b.inherits_.push_back(
          {el.required_attribute("junior"), el.required_attribute("senior"), el.where});
    } else if (el.name == "equiv") {
      b.equiv_.push_back({el.required_attribute("a"), el.required_attribute("b"), el.where});
    } else if (el.name == "arc") {
      b.arcs_.push_back({el.required_attribute("from"), el.required_attribute("label"),
                         el.required_attribute("to")});
    } else {
      throw Error(ErrorCode::UnknownElement, "unexpected <" + el.name + "> in <ontology>",
                  el.where);
    }
  }
  try {
    return b.build();
  } catch (const Error& e) {
    if (e.location()) throw;
    throw Error(e.code(), e.detail(), root.where);
  }
}

// ---------------------------------------------------------------------------
// ConceptRef-level operations

namespace {

void check_tag(const OntologyGraph& g, const ConceptRef& ref) {
  if (ref.ontology != g.kind()) {
    throw Error(ErrorCode::WrongOntologyTag,
                "'" + ref.id + "' is tagged " + std::string(to_string(ref.ontology)) +
                    " but the graph is " + std::string(to_string(g.kind())));
  }
}

}  // namespace

bool subsumes(const OntologyGraph& g, const ConceptRef& ancestor,
              const ConceptRef& descendant) {
  check_tag(g, ancestor);
  check_tag(g, descendant);
  return g.subsumes(ancestor.id, descendant.id);
}

std::set<ConceptRef> inherited_rights_roles(const OntologyGraph& g, const ConceptRef& role) {
  check_tag(g, role);
  std::set<ConceptRef> out;
  for (auto& id : g.inherited_rights_roles(role.id)) out.insert({g.kind(), id});
  return out;
}

std::set<std::string> equivalent_attributes(const OntologyGraph& g,
                                            const AttributeDescriptor& attr) {
  if (!g.contains(attr.name)) {
    throw Error(ErrorCode::UnknownConcept, "attribute '" + attr.name + "' is not in AtO");
  }
  if (!attr.equivalence_enabled) return {attr.name};
  return g.equivalence_class(attr.name);
}

const OntologyGraph& OntologySet::get(OntologyKind kind) const {
  const std::shared_ptr<const OntologyGraph>* p = nullptr;
  switch (kind) {
    case OntologyKind::SO: p = &so; break;
    case OntologyKind::OO: p = &oo; break;
    case OntologyKind::AO: p = &ao; break;
    case OntologyKind::AtO: p = &ato; break;
  }
  if (!p || !*p) {
    throw Error(ErrorCode::ConfigError,
                std::string(to_string(kind)) + " ontology is not loaded");
  }
  return **p;
}

std::shared_ptr<const OntologyGraph>& OntologySet::slot(OntologyKind kind) {
  switch (kind) {
    case OntologyKind::SO: return so;
    case OntologyKind::OO: return oo;
    case OntologyKind::AO: return ao;
    case OntologyKind::AtO: return ato;
  }
  return so;
}

}  // namespace sac
