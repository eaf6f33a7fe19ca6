#include <gtest/gtest.h>

#include "sac/error.hpp"
#include "sac/ontology.hpp"
#include "sac/random_instance.hpp"
#include "support.hpp"

using namespace sac;
using sactest::fixture;
using sactest::slurp;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

OntologyGraph so() { return load_ontology(slurp(fixture("ehealth/so.xml")), OntologyKind::SO); }
OntologyGraph ato() { return load_ontology(slurp(fixture("ehealth/ato.xml")), OntologyKind::AtO); }

}  // namespace

// Counts frozen from a separate XML element count over the fixture files.
TEST(OntologyLoad, FixtureCounts) {
  const auto g = so();
  EXPECT_EQ(g.nodes().size(), 5u);
  EXPECT_EQ(g.isa_edges().size(), 4u);
  EXPECT_EQ(g.inherit_edges().size(), 1u);

  const auto oo = load_ontology(slurp(fixture("ehealth/oo.xml")));
  EXPECT_EQ(oo.nodes().size(), 5u);
  EXPECT_EQ(oo.isa_edges().size(), 3u);
  EXPECT_EQ(oo.arcs().size(), 1u);
  EXPECT_EQ(oo.node_kind("jen_record_file"), NodeKind::Individual);

  const auto ao = load_ontology(slurp(fixture("ehealth/ao.xml")));
  EXPECT_EQ(ao.nodes().size(), 7u);
  EXPECT_EQ(ao.isa_edges().size(), 5u);

  const auto at = ato();
  EXPECT_EQ(at.nodes().size(), 11u);
  EXPECT_EQ(at.equiv_edges().size(), 2u);
}

TEST(OntologyLoad, TopAnswersToReservedIdAndAlias) {
  const auto g = so();
  EXPECT_TRUE(g.contains("Thing"));
  EXPECT_TRUE(g.contains("Anyperson"));
  EXPECT_TRUE(g.is_top("Anyperson"));
  EXPECT_FALSE(g.is_top("person"));
  EXPECT_TRUE(g.subsumes("Anyperson", "doctor"));
  EXPECT_TRUE(g.subsumes("Thing", "clinic_partner"));
  EXPECT_FALSE(g.subsumes("doctor", "Anyperson"));
}

TEST(OntologyLoad, Subsumption) {
  const auto g = so();
  EXPECT_TRUE(g.subsumes("person", "doctor"));
  EXPECT_TRUE(g.subsumes("doctor", "doctor"));
  EXPECT_FALSE(g.subsumes("doctor", "person"));
  EXPECT_FALSE(g.subsumes("doctor", "expert"));
  EXPECT_EQ(code_of([&] { (void)g.subsumes("person", "surgeon"); }), ErrorCode::UnknownConcept);

  const auto ao = load_ontology(slurp(fixture("ehealth/ao.xml")));
  EXPECT_TRUE(ao.subsumes("update", "write"));
  EXPECT_FALSE(ao.subsumes("read", "write"));
  EXPECT_FALSE(ao.subsumes("query", "write"));
}

TEST(OntologyLoad, IsaPath) {
  const auto g = so();
  EXPECT_EQ(g.isa_path("Anyperson", "doctor"),
            (std::vector<std::string>{"doctor", "person", "Anyperson"}));
  EXPECT_TRUE(g.isa_path("doctor", "nurse").empty());
}

TEST(OntologyLoad, InheritedRightsRoles) {
  const auto g = so();
  EXPECT_EQ(g.inherited_rights_roles("expert"), (std::set<std::string>{"expert", "doctor"}));
  EXPECT_EQ(g.inherited_rights_roles("doctor"), (std::set<std::string>{"doctor"}));
  const auto tagged = inherited_rights_roles(g, {OntologyKind::SO, "expert"});
  EXPECT_EQ(tagged.size(), 2u);
  EXPECT_TRUE(tagged.count({OntologyKind::SO, "doctor"}));
}

TEST(OntologyLoad, InheritanceIsTransitive) {
  OntologyBuilder b(OntologyKind::SO);
  b.concept_node("a").concept_node("b").concept_node("c");
  b.inherits("a", "b").inherits("b", "c");
  EXPECT_EQ(b.build().inherited_rights_roles("c"), (std::set<std::string>{"a", "b", "c"}));
}

TEST(OntologyLoad, EquivalentAttributes) {
  const auto g = ato();
  AttributeDescriptor doctor{"Auth_doctors", "doctor", "hospital_ADMIN", true, std::nullopt};
  EXPECT_EQ(equivalent_attributes(g, doctor),
            (std::set<std::string>{"doctor", "physician", "medic"}));
  doctor.equivalence_enabled = false;
  EXPECT_EQ(equivalent_attributes(g, doctor), (std::set<std::string>{"doctor"}));
  AttributeDescriptor unknown{"x", "surgeon", "hospital_ADMIN", true, std::nullopt};
  EXPECT_EQ(code_of([&] { (void)equivalent_attributes(g, unknown); }), ErrorCode::UnknownConcept);
}

TEST(OntologyLoad, FreeFunctionsCheckTags) {
  const auto g = so();
  EXPECT_TRUE(subsumes(g, {OntologyKind::SO, "person"}, {OntologyKind::SO, "nurse"}));
  EXPECT_EQ(code_of([&] {
              (void)subsumes(g, {OntologyKind::OO, "person"}, {OntologyKind::SO, "nurse"});
            }),
            ErrorCode::WrongOntologyTag);
}

TEST(OntologyErrors, CycleIsNamed) {
  try {
    (void)load_ontology(slurp(fixture("broken/cyclic_so/so.xml")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CycleDetected);
    EXPECT_NE(e.detail().find("person -> expert -> doctor -> person"), std::string::npos)
        << e.detail();
    ASSERT_TRUE(e.location());
    EXPECT_EQ(e.location()->line, 2);
  }
}

TEST(OntologyErrors, SelfLoopAndInheritanceCycle) {
  OntologyBuilder self(OntologyKind::SO);
  self.concept_node("a").isa("a", "a");
  EXPECT_EQ(code_of([&] { self.build(); }), ErrorCode::CycleDetected);

  OntologyBuilder roles(OntologyKind::SO);
  roles.concept_node("a").concept_node("b").inherits("a", "b").inherits("b", "a");
  EXPECT_EQ(code_of([&] { roles.build(); }), ErrorCode::CycleDetected);
}

TEST(OntologyErrors, StructuralViolations) {
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::OO).concept_node("a").concept_node("a").build();
            }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] { OntologyBuilder(OntologyKind::OO).concept_node("Thing").build(); }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::OO).top_alias("Top").concept_node("Top").build();
            }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::OO).concept_node("a").isa("a", "missing").build();
            }),
            ErrorCode::DanglingReference);
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::OO)
                  .individual("x")
                  .individual("y")
                  .isa("x", "y")
                  .build();
            }),
            ErrorCode::InvalidIndividualEdge);
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::OO)
                  .concept_node("a")
                  .concept_node("b")
                  .inherits("a", "b")
                  .build();
            }),
            ErrorCode::WrongOntologyTag);
  EXPECT_EQ(code_of([] {
              OntologyBuilder(OntologyKind::SO)
                  .concept_node("a")
                  .concept_node("b")
                  .equiv("a", "b")
                  .build();
            }),
            ErrorCode::WrongOntologyTag);
}

TEST(OntologyErrors, DocumentLevel) {
  EXPECT_EQ(code_of([] { (void)load_ontology("<ontology kind=\"SO\"><concept id=\"a\">"); }),
            ErrorCode::MalformedXml);
  EXPECT_EQ(code_of([] { (void)load_ontology(R"(<ontology kind="SO"/>)", OntologyKind::OO); }),
            ErrorCode::WrongOntologyTag);
  EXPECT_EQ(code_of([] { (void)load_ontology(R"(<ontology kind="XX"/>)"); }),
            ErrorCode::WrongOntologyTag);
  EXPECT_EQ(code_of([] { (void)load_ontology(R"(<ontology kind="SO"><node id="a"/></ontology>)"); }),
            ErrorCode::UnknownElement);
}

TEST(OntologyLoad, ReloadIsStructurallyEqual) {
  EXPECT_TRUE(so() == so());
  EXPECT_FALSE(so() == ato());
}

// Engine subsumption against plain DFS reachability over the raw edges.
TEST(OntologyProperty, SubsumptionMatchesReachability) {
  InstanceGenerator gen(7);
  for (int round = 0; round < 100; ++round) {
    const auto kind = kAllOntologyKinds[round % 4];
    const auto g = gen.random_graph(kind, 12);
    const auto reach = sactest::reachability(g);
    for (const auto& [d, ancestors] : reach) {
      for (const auto& [a, unused] : reach) {
        ASSERT_EQ(g.subsumes(a, d), ancestors.count(a) != 0)
            << "round " << round << ": " << a << " over " << d;
      }
    }
  }
}

TEST(OntologyProperty, SubsumptionIsReflexiveAndTransitive) {
  InstanceGenerator gen(11);
  for (int round = 0; round < 40; ++round) {
    const auto g = gen.random_graph(OntologyKind::OO, 12);
    std::vector<std::string> ids{"Thing"};
    for (const auto& [id, k] : g.nodes()) ids.push_back(id);
    for (const auto& a : ids) {
      EXPECT_TRUE(g.subsumes(a, a));
      for (const auto& b : ids)
        for (const auto& c : ids)
          if (g.subsumes(a, b) && g.subsumes(b, c)) EXPECT_TRUE(g.subsumes(a, c));
    }
  }
}

TEST(OntologyProperty, EquivalenceClassesPartitionNodes) {
  InstanceGenerator gen(13);
  for (int round = 0; round < 40; ++round) {
    const auto g = gen.random_graph(OntologyKind::AtO, 12);
    for (const auto& [id, k] : g.nodes()) {
      const auto cls = g.equivalence_class(id);
      EXPECT_TRUE(cls.count(id));
      for (const auto& other : cls) EXPECT_EQ(g.equivalence_class(other), cls);
    }
    for (const auto& [a, b] : g.equiv_edges()) EXPECT_TRUE(g.equivalence_class(a).count(b));
  }
}
