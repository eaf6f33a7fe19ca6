#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "sac/error.hpp"
#include "sac/scalar.hpp"

namespace sac {

/// The four access-control domains: subjects, objects, actions, attributes.
enum class OntologyKind { SO, OO, AO, AtO };

inline constexpr OntologyKind kAllOntologyKinds[] = {
    OntologyKind::SO, OntologyKind::OO, OntologyKind::AO, OntologyKind::AtO};

std::string_view to_string(OntologyKind kind);
std::optional<OntologyKind> parse_ontology_kind(std::string_view text);

/// Reserved id that names the implicit top concept of every ontology.
inline constexpr std::string_view kTopConcept = "Thing";

struct ConceptRef {
  OntologyKind ontology = OntologyKind::SO;
  std::string id;

  auto operator<=>(const ConceptRef&) const = default;
};

enum class NodeKind { Concept, Individual };

/// A credential or property presented for (or required by) a rule.
struct AttributeDescriptor {
  std::string attribute_id;
  std::string name;  // concept id in AtO
  std::string soa_id;
  bool equivalence_enabled = false;
  std::optional<Scalar> value;

  bool operator==(const AttributeDescriptor&) const = default;
};

/// Normalizes the `e` flag: "Enabled" and "Enable" mean true, anything else
/// (including absence) means false.
bool parse_equivalence_flag(std::string_view text);

/// Immutable, validated concept graph for one ontology.
///
/// Besides the declared nodes each graph has an implicit top concept that
/// subsumes every node. It answers to the reserved id `Thing` and, when the
/// document sets `top="..."`, to that alias as well. The top is not counted
/// in `nodes()`.
class OntologyGraph {
 public:
  using Edge = std::pair<std::string, std::string>;
  struct Arc {
    std::string from;
    std::string label;
    std::string to;
    auto operator<=>(const Arc&) const = default;
  };

  OntologyKind kind() const noexcept { return kind_; }
  const std::string& top_alias() const noexcept { return top_alias_; }

  /// Declared nodes, ordered by id.
  const std::map<std::string, NodeKind, std::less<>>& nodes() const noexcept {
    return nodes_;
  }
  /// (child, parent) pairs.
  const std::set<Edge>& isa_edges() const noexcept { return isa_; }
  /// (junior, senior) pairs: the senior role holds the junior's rights.
  const std::set<Edge>& inherit_edges() const noexcept { return inherits_; }
  /// Unordered pairs stored with first < second.
  const std::set<Edge>& equiv_edges() const noexcept { return equiv_; }
  const std::set<Arc>& arcs() const noexcept { return arcs_; }

  bool contains(std::string_view id) const;
  bool is_top(std::string_view id) const;
  std::optional<NodeKind> node_kind(std::string_view id) const;

  /// True iff ancestor == descendant or descendant reaches ancestor along
  /// is-a edges. Throws Error(UnknownConcept).
  bool subsumes(std::string_view ancestor, std::string_view descendant) const;

  /// Shortest is-a chain descendant, ..., ancestor (empty when unrelated).
  std::vector<std::string> isa_path(std::string_view ancestor,
                                    std::string_view descendant) const;

  /// The role itself plus every role whose rights it inherits (transitively).
  std::set<std::string> inherited_rights_roles(std::string_view role) const;

  /// Connected component of `id` under equivalence edges.
  std::set<std::string> equivalence_class(std::string_view id) const;

  bool operator==(const OntologyGraph& other) const;

 private:
  friend class OntologyBuilder;

  std::size_t index_of(std::string_view id) const;  // throws UnknownConcept
  const std::string& name_of(std::size_t index) const;

  OntologyKind kind_ = OntologyKind::SO;
  std::string top_alias_;
  std::map<std::string, NodeKind, std::less<>> nodes_;
  std::set<Edge> isa_;
  std::set<Edge> inherits_;
  std::set<Edge> equiv_;
  std::set<Arc> arcs_;

  // Index 0 is the top concept; 1..n follow the sorted node order.
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<bool>> ancestors_;
  std::vector<std::vector<std::size_t>> juniors_;
  std::vector<std::size_t> equiv_component_;
};

/// Programmatic construction; `build()` runs the same validation as
/// load_ontology.
class OntologyBuilder {
 public:
  explicit OntologyBuilder(OntologyKind kind);

  OntologyBuilder& top_alias(std::string alias);
  OntologyBuilder& concept_node(std::string id);
  OntologyBuilder& individual(std::string id);
  OntologyBuilder& isa(std::string child, std::string parent);
  OntologyBuilder& inherits(std::string junior, std::string senior);
  OntologyBuilder& equiv(std::string a, std::string b);
  OntologyBuilder& arc(std::string from, std::string label, std::string to);

  OntologyGraph build() const;

 private:
  struct Declared {
    std::string id;
    NodeKind kind;
    std::optional<SourceLocation> where;
  };
  struct EdgeDecl {
    std::string a;
    std::string b;
    std::optional<SourceLocation> where;
  };

  friend OntologyGraph load_ontology(std::string_view, std::optional<OntologyKind>);

  OntologyKind kind_;
  std::string top_alias_;
  std::vector<Declared> nodes_;
  std::vector<EdgeDecl> isa_;
  std::vector<EdgeDecl> inherits_;
  std::vector<EdgeDecl> equiv_;
  std::vector<OntologyGraph::Arc> arcs_;
};

/// Parses and validates an ontology document. When `expected` is given the
/// document's `kind` must match it (WrongOntologyTag otherwise).
OntologyGraph load_ontology(std::string_view document,
                            std::optional<OntologyKind> expected = std::nullopt);

bool subsumes(const OntologyGraph& g, const ConceptRef& ancestor,
              const ConceptRef& descendant);

std::set<ConceptRef> inherited_rights_roles(const OntologyGraph& g,
                                            const ConceptRef& role);

std::set<std::string> equivalent_attributes(const OntologyGraph& g,
                                            const AttributeDescriptor& attr);

/// The four graphs a policy is interpreted against.
struct OntologySet {
  std::shared_ptr<const OntologyGraph> so;
  std::shared_ptr<const OntologyGraph> oo;
  std::shared_ptr<const OntologyGraph> ao;
  std::shared_ptr<const OntologyGraph> ato;

  const OntologyGraph& get(OntologyKind kind) const;
  std::shared_ptr<const OntologyGraph>& slot(OntologyKind kind);
  bool complete() const { return so && oo && ao && ato; }
};

}  // namespace sac
