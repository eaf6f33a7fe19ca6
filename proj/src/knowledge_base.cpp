#include "sac/knowledge_base.hpp"

#include <algorithm>

#include "sac/error.hpp"
#include "sac/xml.hpp"

namespace sac {

const SubjectRecord* KnowledgeBase::find_subject(std::string_view id) const {
  auto it = subjects.find(id);
  return it == subjects.end() ? nullptr : &it->second;
}

const ObjectRecord* KnowledgeBase::find_object(std::string_view id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : &it->second;
}

std::optional<std::string> KnowledgeBase::object_for_path(std::string_view path) const {
  for (const auto& [id, rec] : objects) {
    if (!rec.path.empty() && rec.path == path) return id;
  }
  return std::nullopt;
}

namespace {

using xml::Element;

Scalar typed(const Element& el, ScalarType type, std::string_view text) {
  try {
    return parse_scalar(type, text);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidDocument, e.detail(), el.where);
  }
}

ScalarType value_type(const Element& el) {
  const auto* t = el.find_attribute("valueType");
  if (!t) return ScalarType::String;
  auto type = parse_scalar_type(*t);
  if (!type) throw Error(ErrorCode::InvalidDocument, "unknown valueType '" + *t + "'", el.where);
  return *type;
}

AttributeDescriptor parse_attribute(const Element& el) {
  AttributeDescriptor a;
  a.attribute_id = el.required_attribute("attributeID");
  if (const auto* n = el.find_attribute("name")) a.name = *n;
  a.soa_id = el.required_attribute("soa");
  if (const auto* e = el.find_attribute("e")) a.equivalence_enabled = parse_equivalence_flag(*e);
  if (const auto* v = el.find_attribute("value")) a.value = typed(el, value_type(el), *v);
  return a;
}

template <typename Record>
void parse_entry(const Element& el, Record& rec) {
  for (const auto& child : el.children) {
    if (child.name == "concept") {
      rec.concepts.push_back(child.required_attribute("id"));
    } else if (child.name == "attribute") {
      rec.attributes.push_back(parse_attribute(child));
    } else {
      throw Error(ErrorCode::UnknownElement,
                  "unexpected <" + child.name + "> inside <" + el.name + ">", child.where);
    }
  }
}

}  // namespace

KnowledgeBase parse_registry(std::string_view text) {
  const auto root = xml::parse(text);
  if (root.name != "registry") {
    throw Error(ErrorCode::UnknownElement, "expected <registry> root, found <" + root.name + ">",
                root.where);
  }
  KnowledgeBase kb;
  for (const auto& el : root.children) {
    if (el.name == "subject") {
      SubjectRecord rec;
      parse_entry(el, rec);
      const auto& id = el.required_attribute("id");
      if (!kb.subjects.emplace(id, std::move(rec)).second) {
        throw Error(ErrorCode::DuplicateId, "subject '" + id + "' registered twice", el.where);
      }
    } else if (el.name == "object") {
      ObjectRecord rec;
      if (const auto* p = el.find_attribute("path")) rec.path = *p;
      parse_entry(el, rec);
      const auto& id = el.required_attribute("id");
      if (!kb.objects.emplace(id, std::move(rec)).second) {
        throw Error(ErrorCode::DuplicateId, "object '" + id + "' registered twice", el.where);
      }
    } else if (el.name == "range") {
      ValueRange range;
      range.attribute = el.required_attribute("attribute");
      range.type = value_type(el);
      if (const auto* v = el.find_attribute("min")) range.min = typed(el, range.type, *v);
      if (const auto* v = el.find_attribute("max")) range.max = typed(el, range.type, *v);
      for (const auto& child : el.children) {
        if (child.name != "value") {
          throw Error(ErrorCode::UnknownElement, "unexpected <" + child.name + "> inside <range>",
                      child.where);
        }
        range.values.push_back(typed(child, range.type, child.trimmed_text()));
      }
      const bool numeric = range.type == ScalarType::Int || range.type == ScalarType::Decimal;
      if (range.values.empty() && !(numeric && range.min && range.max) &&
          range.type != ScalarType::Bool) {
        throw Error(ErrorCode::InvalidDocument,
                    "range for '" + range.attribute + "' needs min/max or <value> entries",
                    el.where);
      }
      if (numeric && range.min && range.max &&
          format_scalar(*range.min) != format_scalar(*range.max)) {
        const bool inverted =
            range.type == ScalarType::Int
                ? std::get<std::int64_t>(*range.min) > std::get<std::int64_t>(*range.max)
                : std::get<double>(*range.min) > std::get<double>(*range.max);
        if (inverted) {
          throw Error(ErrorCode::InvalidDocument, "range min exceeds max", el.where);
        }
      }
      kb.ranges.push_back(std::move(range));
    } else {
      throw Error(ErrorCode::UnknownElement, "unexpected <" + el.name + "> inside <registry>",
                  el.where);
    }
  }
  return kb;
}

ValidationReport validate_registry(const KnowledgeBase& kb, const OntologySet& ontologies) {
  ValidationReport report;
  const auto& so = ontologies.get(OntologyKind::SO);
  const auto& oo = ontologies.get(OntologyKind::OO);
  const auto& ato = ontologies.get(OntologyKind::AtO);
  auto check_attrs = [&](const std::string& base, const std::vector<AttributeDescriptor>& attrs) {
    for (const auto& a : attrs) {
      if (!a.name.empty() && !ato.contains(a.name)) {
        report.push_back({ErrorCode::DanglingReference,
                          base + "/attribute[@attributeID='" + a.attribute_id + "']",
                          "'" + a.name + "' is not in AtO"});
      }
    }
  };
  for (const auto& [id, rec] : kb.subjects) {
    const auto base = "registry/subject[@id='" + id + "']";
    for (const auto& c : rec.concepts) {
      if (!so.contains(c)) {
        report.push_back({ErrorCode::DanglingReference, base + "/concept[@id='" + c + "']",
                          "'" + c + "' is not in SO"});
      }
    }
    check_attrs(base, rec.attributes);
  }
  for (const auto& [id, rec] : kb.objects) {
    const auto base = "registry/object[@id='" + id + "']";
    for (const auto& c : rec.concepts) {
      if (!oo.contains(c)) {
        report.push_back({ErrorCode::DanglingReference, base + "/concept[@id='" + c + "']",
                          "'" + c + "' is not in OO"});
      }
    }
    check_attrs(base, rec.attributes);
  }
  return report;
}

namespace {

void merge_attributes(const std::vector<AttributeDescriptor>& registered,
                      const std::vector<AttributeDescriptor>& presented,
                      const std::set<std::string>& trusted, const std::string& owner,
                      std::vector<AttributeDescriptor>& out, std::vector<std::string>& notes) {
  out = registered;
  for (const auto& a : presented) {
    if (!trusted.count(a.soa_id)) {
      notes.push_back(owner + " attribute " + a.attribute_id + " dropped: issuer '" + a.soa_id +
                      "' is not trusted");
      continue;
    }
    auto same_id = std::find_if(registered.begin(), registered.end(), [&](const auto& r) {
      return r.attribute_id == a.attribute_id;
    });
    if (same_id != registered.end()) {
      if (!(*same_id == a)) {
        notes.push_back(owner + " attribute " + a.attribute_id +
                        " conflicts with the registry; registry value kept");
      }
      continue;
    }
    out.push_back(a);
  }
}

void add_values(const std::vector<AttributeDescriptor>& attrs, Context& ctx,
                std::vector<std::string>& notes) {
  for (const auto& a : attrs) {
    if (!a.value) continue;
    auto it = ctx.find(a.attribute_id);
    if (it != ctx.end() && !(it->second == *a.value)) {
      notes.push_back("environment value of " + a.attribute_id +
                      " replaced by the attribute value");
    }
    ctx.insert_or_assign(a.attribute_id, *a.value);
  }
}

}  // namespace

EnrichedRequest enrich(const XacmlRequestDoc& doc, const KnowledgeBase& kb,
                       const std::set<std::string>& trusted_soas) {
  EnrichedRequest out;
  auto& req = out.request;
  req.subject_id = doc.subject_id;
  req.object_id = doc.resource_id;
  req.action = doc.action_id;
  req.purpose = doc.purpose;
  req.context = doc.environment;

  const auto* subject = kb.find_subject(doc.subject_id);
  if (subject) {
    for (const auto& c : subject->concepts) {
      const bool activated =
          doc.subject_concepts.empty() ||
          std::find(doc.subject_concepts.begin(), doc.subject_concepts.end(), c) !=
              doc.subject_concepts.end();
      if (activated) req.subject_concepts.insert(c);
    }
  }
  for (const auto& c : doc.subject_concepts) {
    if (!subject || std::find(subject->concepts.begin(), subject->concepts.end(), c) ==
                        subject->concepts.end()) {
      out.conflicts.push_back("declared role " + c + " is not registered for the subject");
    }
  }
  merge_attributes(subject ? subject->attributes : std::vector<AttributeDescriptor>{},
                   doc.subject_attributes, trusted_soas, "subject", req.subject_attributes,
                   out.conflicts);

  const auto* object = kb.find_object(doc.resource_id);
  if (object) req.object_concepts.insert(object->concepts.begin(), object->concepts.end());
  merge_attributes(object ? object->attributes : std::vector<AttributeDescriptor>{},
                   doc.resource_attributes, trusted_soas, "resource", req.object_attributes,
                   out.conflicts);

  add_values(req.subject_attributes, req.context, out.conflicts);
  add_values(req.object_attributes, req.context, out.conflicts);
  return out;
}

}  // namespace sac
