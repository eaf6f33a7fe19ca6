#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sac/error.hpp"

namespace sac::xml {

/// Minimal element tree. Attribute order is kept as written; character data
/// of an element is concatenated into `text`.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  SourceLocation where;

  const std::string* find_attribute(std::string_view key) const;

  /// Throws Error(InvalidDocument) naming the element and its location.
  const std::string& required_attribute(std::string_view key) const;

  /// `text` without leading/trailing whitespace.
  std::string trimmed_text() const;

  Element& add_child(std::string child_name);
  Element& set(std::string key, std::string value);
};

/// Parses UTF-8 XML. Throws Error(MalformedXml) with line/column.
Element parse(std::string_view text);

/// Canonical form: XML declaration, attributes sorted by name, two-space
/// indentation, empty elements self-closed, one trailing newline.
std::string to_canonical(const Element& root);

std::string escape(std::string_view raw);

}  // namespace sac::xml
