#include "sac/xml.hpp"

#include <expat.h>

#include <algorithm>
#include <memory>

namespace sac::xml {

const std::string* Element::find_attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::string& Element::required_attribute(std::string_view key) const {
  if (const auto* v = find_attribute(key)) return *v;
  throw Error(ErrorCode::InvalidDocument,
              "element <" + name + "> requires attribute '" + std::string(key) + "'",
              where);
}

std::string Element::trimmed_text() const {
  constexpr std::string_view ws = " \t\r\n";
  auto first = text.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

Element& Element::add_child(std::string child_name) {
  children.emplace_back();
  children.back().name = std::move(child_name);
  return children.back();
}

Element& Element::set(std::string key, std::string value) {
  attributes.emplace_back(std::move(key), std::move(value));
  return *this;
}

namespace {

struct ParseState {
  XML_Parser parser = nullptr;
  Element root;
  std::vector<Element*> stack;
  bool has_root = false;
};

SourceLocation current_location(XML_Parser parser) {
  return {static_cast<int>(XML_GetCurrentLineNumber(parser)),
          static_cast<int>(XML_GetCurrentColumnNumber(parser)) + 1};
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto* st = static_cast<ParseState*>(data);
  Element* el = nullptr;
  if (st->stack.empty()) {
    st->root.name = name;
    st->has_root = true;
    el = &st->root;
  } else {
    el = &st->stack.back()->add_child(name);
  }
  el->where = current_location(st->parser);
  for (int i = 0; atts[i] != nullptr; i += 2) {
    el->attributes.emplace_back(atts[i], atts[i + 1]);
  }
  st->stack.push_back(el);
}

void XMLCALL on_end(void* data, const XML_Char*) {
  static_cast<ParseState*>(data)->stack.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto* st = static_cast<ParseState*>(data);
  if (!st->stack.empty()) st->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

struct ParserDeleter {
  void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

}  // namespace

Element parse(std::string_view text) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw Error(ErrorCode::MalformedXml, "cannot allocate XML parser");
  ParseState st;
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw Error(ErrorCode::MalformedXml,
                XML_ErrorString(XML_GetErrorCode(parser.get())),
                current_location(parser.get()));
  }
  if (!st.has_root) {
    throw Error(ErrorCode::MalformedXml, "document has no root element",
                SourceLocation{1, 1});
  }
  return std::move(st.root);
}

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

void write_element(const Element& el, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += '<';
  out += el.name;
  auto attrs = el.attributes;
  std::stable_sort(attrs.begin(), attrs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [k, v] : attrs) {
    out += ' ';
    out += k;
    out += "=\"";
    out += escape(v);
    out += '"';
  }
  if (el.children.empty() && el.text.empty()) {
    out += "/>\n";
    return;
  }
  out += '>';
  if (el.children.empty()) {
    out += escape(el.text);
  } else {
    out += '\n';
    for (const auto& child : el.children) write_element(child, depth + 1, out);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
  }
  out += "</";
  out += el.name;
  out += ">\n";
}

}  // namespace

std::string to_canonical(const Element& root) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_element(root, 0, out);
  return out;
}

}  // namespace sac::xml
