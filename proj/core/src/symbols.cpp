#include "tracelens/symbols.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "tracelens/error.hpp"

namespace tracelens {
namespace {

// --- lexer -----------------------------------------------------------------

enum class Tok { kIdent, kNumber, kPunct, kLiteral };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  bool at_line_start = true;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      at_line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#' && at_line_start) {
      // Preprocessor line, honouring backslash continuations.
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
          ++line;
          i += 2;
          continue;
        }
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') break;
        ++i;
      }
      continue;
    }
    at_line_start = false;
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      i = std::min(n, i + 2);
      continue;
    }
    if (c == '"' || c == '\'') {
      int start_line = line;
      char quote = c;
      ++i;
      while (i < n && src[i] != quote) {
        if (src[i] == '\\') ++i;
        else if (src[i] == '\n') ++line;
        ++i;
      }
      ++i;
      out.push_back({Tok::kLiteral, "\"\"", start_line});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::kIdent, src.substr(i, j - i), line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      out.push_back({Tok::kNumber, src.substr(i, j - i), line});
      i = j;
      continue;
    }
    out.push_back({Tok::kPunct, std::string(1, c), line});
    ++i;
  }
  return out;
}

// --- statement grouping ----------------------------------------------------

// A file-scope statement: tokens with balanced {...} bodies folded into
// nested groups.
struct Item {
  Token tok;
  std::shared_ptr<std::vector<Item>> group;  // set for a {...} body

  bool is(std::string_view p) const { return !group && tok.text == p && tok.kind == Tok::kPunct; }
  bool ident(std::string_view p) const { return !group && tok.kind == Tok::kIdent && tok.text == p; }
};

using Items = std::vector<Item>;

// Reads items until the closing '}' (when nested) or end of input.
Items read_group(const std::vector<Token>& toks, std::size_t& pos, bool nested) {
  Items out;
  while (pos < toks.size()) {
    const Token& t = toks[pos];
    if (t.kind == Tok::kPunct && t.text == "}") {
      ++pos;
      if (nested) return out;
      continue;  // stray brace at file scope
    }
    if (t.kind == Tok::kPunct && t.text == "{") {
      ++pos;
      Item item{t, std::make_shared<Items>(read_group(toks, pos, true))};
      out.push_back(std::move(item));
      continue;
    }
    out.push_back({t, nullptr});
    ++pos;
  }
  return out;
}

struct Statement {
  Items items;
  int line = 0;
  bool function_definition = false;
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {
      "if", "while", "for", "switch", "return", "sizeof", "do", "else",
      "struct", "union", "enum", "typedef", "static", "extern", "const",
      "volatile", "register", "inline", "void", "int", "char", "short",
      "long", "float", "double", "signed", "unsigned", "_Bool", "bool"};
  return kw.count(s) > 0;
}

// Splits a group into statements. A body group that directly follows ')'
// terminates a function definition.
std::vector<Statement> split_statements(const Items& items) {
  std::vector<Statement> out;
  Statement cur;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    if (cur.items.empty()) cur.line = it.tok.line;
    if (it.is(";")) {
      if (!cur.items.empty()) out.push_back(std::move(cur));
      cur = Statement{};
      continue;
    }
    if (it.group && !cur.items.empty() && cur.items.back().is(")")) {
      cur.items.push_back(it);
      cur.function_definition = true;
      out.push_back(std::move(cur));
      cur = Statement{};
      continue;
    }
    cur.items.push_back(it);
  }
  if (!cur.items.empty()) out.push_back(std::move(cur));
  return out;
}

// --- types -----------------------------------------------------------------

struct TypeRef {
  enum class Base { kScalar, kStruct, kNamed, kUnknown } base = Base::kUnknown;
  ScalarKind scalar = ScalarKind::kInt;
  std::string name;  // struct tag, typedef name, or unknown spelling
};

struct Declarator {
  std::string name;
  int line = 0;
  int pointer = 0;
  bool function = false;
  std::vector<std::string> bounds;  // raw array bound text ("" when absent)
};

struct Decl {
  bool is_typedef = false;
  TypeRef type;
  std::vector<Declarator> declarators;
};

struct Member {
  std::string name;
  int line = 0;
  TypeRef type;
  int pointer = 0;
  std::vector<std::string> bounds;
};

class TypeTable {
 public:
  std::string add_struct(std::string tag, std::vector<Member> members) {
    if (tag.empty()) tag = "<anon#" + std::to_string(anon_++) + ">";
    structs_[tag] = std::move(members);
    return tag;
  }
  void add_typedef(const std::string& name, const TypeRef& type, int pointer,
                   std::vector<std::string> bounds) {
    typedefs_[name] = {type, pointer, std::move(bounds)};
  }
  void add_enum(const std::string& tag) { enums_.insert(tag); }

  const std::vector<Member>* find_struct(const std::string& tag) const {
    auto it = structs_.find(tag);
    return it == structs_.end() ? nullptr : &it->second;
  }
  struct Alias {
    TypeRef type;
    int pointer = 0;
    std::vector<std::string> bounds;
  };
  const Alias* find_typedef(const std::string& name) const {
    auto it = typedefs_.find(name);
    return it == typedefs_.end() ? nullptr : &it->second;
  }
  bool is_type_name(const std::string& name) const {
    return typedefs_.count(name) > 0;
  }

 private:
  std::map<std::string, std::vector<Member>> structs_;
  std::map<std::string, Alias> typedefs_;
  std::set<std::string> enums_;
  int anon_ = 0;
};

std::optional<ScalarKind> builtin_scalar(const std::string& s) {
  static const std::map<std::string, ScalarKind> kBuiltins = {
      {"int", ScalarKind::kInt},         {"char", ScalarKind::kInt},
      {"short", ScalarKind::kInt},       {"long", ScalarKind::kInt},
      {"signed", ScalarKind::kInt},      {"unsigned", ScalarKind::kInt},
      {"float", ScalarKind::kFloat},     {"double", ScalarKind::kFloat},
      {"_Bool", ScalarKind::kBool},      {"bool", ScalarKind::kBool},
      {"int8_t", ScalarKind::kInt},      {"int16_t", ScalarKind::kInt},
      {"int32_t", ScalarKind::kInt},     {"int64_t", ScalarKind::kInt},
      {"uint8_t", ScalarKind::kInt},     {"uint16_t", ScalarKind::kInt},
      {"uint32_t", ScalarKind::kInt},    {"uint64_t", ScalarKind::kInt},
      {"size_t", ScalarKind::kInt},      {"ssize_t", ScalarKind::kInt},
      {"intptr_t", ScalarKind::kInt},    {"uintptr_t", ScalarKind::kInt}};
  auto it = kBuiltins.find(s);
  if (it == kBuiltins.end()) return std::nullopt;
  return it->second;
}

bool is_qualifier(const std::string& s) {
  static const std::set<std::string> q = {"static", "extern", "const", "volatile",
                                          "register", "inline", "__inline",
                                          "restrict", "__restrict", "auto"};
  return q.count(s) > 0;
}

class DeclParser {
 public:
  DeclParser(TypeTable& types, bool register_types)
      : types_(types), register_(register_types) {}

  // Returns nullopt for statements that are not declarations we understand.
  std::optional<Decl> parse(const Items& items) {
    items_ = &items;
    pos_ = 0;
    Decl decl;
    if (peek_ident("typedef")) {
      decl.is_typedef = true;
      ++pos_;
    }
    auto type = parse_specifiers();
    if (!type) return std::nullopt;
    decl.type = *type;
    while (pos_ < items.size()) {
      auto d = parse_declarator();
      if (!d) return std::nullopt;
      decl.declarators.push_back(std::move(*d));
      skip_initializer();
      if (pos_ < items.size() && items[pos_].is(",")) {
        ++pos_;
        continue;
      }
      break;
    }
    if (pos_ != items.size()) return std::nullopt;
    return decl;
  }

 private:
  bool peek_ident(std::string_view s) const {
    return pos_ < items_->size() && (*items_)[pos_].ident(s);
  }

  void skip_attributes() {
    while (pos_ < items_->size() && (*items_)[pos_].tok.kind == Tok::kIdent &&
           ((*items_)[pos_].tok.text == "__attribute__" ||
            (*items_)[pos_].tok.text == "__declspec")) {
      ++pos_;
      int depth = 0;
      while (pos_ < items_->size()) {
        if ((*items_)[pos_].is("(")) ++depth;
        if ((*items_)[pos_].is(")") && --depth == 0) {
          ++pos_;
          break;
        }
        ++pos_;
      }
    }
  }

  std::optional<TypeRef> parse_specifiers() {
    TypeRef type;
    bool have_scalar = false;
    bool have_type = false;
    while (pos_ < items_->size()) {
      skip_attributes();
      if (pos_ >= items_->size()) break;
      const Item& it = (*items_)[pos_];
      if (it.group || it.tok.kind != Tok::kIdent) break;
      const std::string& w = it.tok.text;
      if (is_qualifier(w)) {
        ++pos_;
        continue;
      }
      if (w == "struct" || w == "union" || w == "enum") {
        if (have_type || have_scalar) return std::nullopt;
        ++pos_;
        std::string tag;
        if (pos_ < items_->size() && (*items_)[pos_].tok.kind == Tok::kIdent &&
            !(*items_)[pos_].group) {
          tag = (*items_)[pos_].tok.text;
          ++pos_;
        }
        const Item* body = nullptr;
        if (pos_ < items_->size() && (*items_)[pos_].group) body = &(*items_)[pos_++];
        if (w == "enum") {
          if (register_ && !tag.empty()) types_.add_enum(tag);
          type.base = TypeRef::Base::kScalar;
          type.scalar = ScalarKind::kEnum;
        } else {
          if (body) {
            std::string assigned = register_or_lookup(tag, *body->group);
            tag = assigned;
          }
          if (tag.empty()) return std::nullopt;
          type.base = TypeRef::Base::kStruct;
          type.name = tag;
        }
        have_type = true;
        continue;
      }
      if (auto k = builtin_scalar(w)) {
        if (have_type) break;
        if (!have_scalar || type.scalar == ScalarKind::kInt) type.scalar = *k;
        if (*k == ScalarKind::kFloat) type.scalar = ScalarKind::kFloat;
        type.base = TypeRef::Base::kScalar;
        have_scalar = true;
        ++pos_;
        continue;
      }
      if (w == "void") {
        if (have_type || have_scalar) return std::nullopt;
        type.base = TypeRef::Base::kUnknown;
        type.name = "void";
        have_type = true;
        ++pos_;
        continue;
      }
      if (have_type || have_scalar) break;
      // A leading identifier followed by another identifier or '*' names a
      // type (typedef or unknown).
      if (pos_ + 1 < items_->size() &&
          ((*items_)[pos_ + 1].tok.kind == Tok::kIdent || (*items_)[pos_ + 1].is("*"))) {
        type.base = types_.is_type_name(w) || !register_ ? TypeRef::Base::kNamed
                                                         : TypeRef::Base::kNamed;
        type.name = w;
        have_type = true;
        ++pos_;
        continue;
      }
      break;
    }
    if (!have_type && !have_scalar) return std::nullopt;
    return type;
  }

  std::string register_or_lookup(const std::string& tag, const Items& body) {
    if (!register_) {
      // Second pass: anonymous bodies were registered in the first pass in
      // the same order.
      if (!tag.empty()) return tag;
      return "<anon#" + std::to_string(anon_seen_++) + ">";
    }
    std::vector<Member> members;
    for (const auto& st : split_statements(body)) {
      DeclParser inner(types_, true);
      inner.anon_seen_ = 0;
      auto d = inner.parse(strip_bitfields(st.items));
      if (!d) {
        members.push_back({"", st.line, TypeRef{}, 0, {}});
        continue;
      }
      for (auto& dec : d->declarators)
        members.push_back({dec.name, dec.line, d->type, dec.pointer, dec.bounds});
    }
    return types_.add_struct(tag, std::move(members));
  }

  static Items strip_bitfields(const Items& items) {
    Items out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].is(":")) {
        while (i < items.size() && !items[i].is(",")) ++i;
        if (i < items.size()) out.push_back(items[i]);
        continue;
      }
      out.push_back(items[i]);
    }
    return out;
  }

  std::optional<Declarator> parse_declarator() {
    Declarator d;
    while (pos_ < items_->size() && ((*items_)[pos_].is("*") ||
                                     (*items_)[pos_].ident("const") ||
                                     (*items_)[pos_].ident("volatile") ||
                                     (*items_)[pos_].ident("restrict"))) {
      if ((*items_)[pos_].is("*")) ++d.pointer;
      ++pos_;
    }
    if (pos_ < items_->size() && (*items_)[pos_].is("(")) {
      // Function pointer or parenthesised declarator.
      int depth = 0;
      while (pos_ < items_->size()) {
        const Item& it = (*items_)[pos_];
        if (it.is("(")) ++depth;
        if (it.tok.kind == Tok::kIdent && d.name.empty() && !is_keyword(it.tok.text)) {
          d.name = it.tok.text;
          d.line = it.tok.line;
        }
        if (it.is("*")) ++d.pointer;
        ++pos_;
        if (it.is(")") && --depth == 0) break;
      }
      if (pos_ < items_->size() && (*items_)[pos_].is("(")) {
        d.function = true;
        skip_parens();
      }
      if (d.name.empty()) return std::nullopt;
      return d;
    }
    if (pos_ >= items_->size() || (*items_)[pos_].tok.kind != Tok::kIdent ||
        (*items_)[pos_].group)
      return std::nullopt;
    d.name = (*items_)[pos_].tok.text;
    d.line = (*items_)[pos_].tok.line;
    ++pos_;
    skip_attributes();
    if (pos_ < items_->size() && (*items_)[pos_].is("(")) {
      d.function = true;
      skip_parens();
      skip_attributes();
    }
    while (pos_ < items_->size() && (*items_)[pos_].is("[")) {
      ++pos_;
      std::string bound;
      while (pos_ < items_->size() && !(*items_)[pos_].is("]")) {
        bound += (*items_)[pos_].tok.text;
        ++pos_;
      }
      if (pos_ < items_->size()) ++pos_;
      d.bounds.push_back(bound);
    }
    return d;
  }

  void skip_parens() {
    int depth = 0;
    while (pos_ < items_->size()) {
      const Item& it = (*items_)[pos_];
      if (it.is("(")) ++depth;
      ++pos_;
      if (it.is(")") && --depth == 0) return;
    }
  }

  void skip_initializer() {
    if (pos_ >= items_->size() || !(*items_)[pos_].is("=")) return;
    int depth = 0;
    while (pos_ < items_->size()) {
      const Item& it = (*items_)[pos_];
      if (it.is("(")) ++depth;
      if (it.is(")")) --depth;
      if (depth == 0 && it.is(",")) return;
      ++pos_;
    }
  }

  TypeTable& types_;
  bool register_;
  const Items* items_ = nullptr;
  std::size_t pos_ = 0;

 public:
  int anon_seen_ = 0;
};

// --- flattening ------------------------------------------------------------

struct Sink {
  std::vector<FieldDecl> fields;
  std::vector<SkippedDecl> skipped;
  std::string file;
};

class Flattener {
 public:
  Flattener(const TypeTable& types, Sink& sink) : types_(types), sink_(sink) {}

  void flatten(const std::string& path, const TypeRef& type, int pointer,
               const std::vector<std::string>& bounds, int line,
               bool via_typedef = false) {
    if (pointer > 0) return skip(line, "'" + path + "' is a pointer");
    if (!bounds.empty()) {
      long n = 0;
      try {
        std::size_t used = 0;
        n = std::stol(bounds.front(), &used, 0);
        if (used != bounds.front().size()) n = -1;
      } catch (const std::exception&) {
        n = -1;
      }
      if (n <= 0 || n > 16)
        return skip(line, "'" + path + "' array bound is not a literal <= 16");
      std::vector<std::string> rest(bounds.begin() + 1, bounds.end());
      for (long i = 0; i < n; ++i)
        flatten(path + "[" + std::to_string(i) + "]", type, 0, rest, line, via_typedef);
      return;
    }
    switch (type.base) {
      case TypeRef::Base::kScalar:
        sink_.fields.push_back({path, type.scalar, ""});
        return;
      case TypeRef::Base::kStruct: {
        if (visiting_.count(type.name))
          return skip(line, "'" + path + "' has a recursive composite type");
        const auto* members = types_.find_struct(type.name);
        if (!members) return skip(line, "'" + path + "' has incomplete type struct " + type.name);
        visiting_.insert(type.name);
        for (const auto& m : *members) {
          if (m.name.empty()) {
            skip(m.line, "unparseable member in struct " + type.name);
            continue;
          }
          flatten(path + "." + m.name, m.type, m.pointer, m.bounds, m.line);
        }
        visiting_.erase(type.name);
        return;
      }
      case TypeRef::Base::kNamed: {
        if (via_typedef)
          return skip(line, "'" + path + "' uses a typedef chain deeper than one level");
        const auto* alias = types_.find_typedef(type.name);
        if (!alias) return skip(line, "'" + path + "' has unknown type '" + type.name + "'");
        flatten(path, alias->type, alias->pointer, alias->bounds, line, true);
        return;
      }
      case TypeRef::Base::kUnknown:
        return skip(line, "'" + path + "' has no scalar type");
    }
  }

 private:
  void skip(int line, std::string reason) {
    sink_.skipped.push_back({sink_.file, line, std::move(reason)});
  }

  const TypeTable& types_;
  Sink& sink_;
  std::set<std::string> visiting_;
};

struct ParsedFile {
  std::string file;
  std::vector<Statement> statements;
};

ScanReport scan_parsed(const std::vector<ParsedFile>& files) {
  TypeTable types;
  // Pass 1: struct/enum/typedef definitions from every file.
  for (const auto& pf : files) {
    for (const auto& st : pf.statements) {
      if (st.function_definition) continue;
      DeclParser parser(types, true);
      auto decl = parser.parse(st.items);
      if (decl && decl->is_typedef)
        for (const auto& d : decl->declarators)
          if (!d.function) types.add_typedef(d.name, decl->type, d.pointer, d.bounds);
    }
  }

  ScanReport report;
  std::set<std::pair<std::string, std::string>> seen_functions;
  std::map<std::string, ScalarKind> seen_fields;
  for (const auto& pf : files) {
    Sink sink;
    sink.file = pf.file;
    Flattener flat(types, sink);
    // Anonymous struct numbering restarts so pass-2 lookups line up with
    // the pass-1 registration order.
    int anon_counter = 0;
    for (const auto& st : pf.statements) {
      if (st.function_definition) {
        // Name: identifier before the first '(' at paren depth 0.
        std::string name;
        int line = st.line;
        for (std::size_t i = 1; i < st.items.size(); ++i) {
          if (st.items[i].is("(") && st.items[i - 1].tok.kind == Tok::kIdent &&
              !st.items[i - 1].group && !is_keyword(st.items[i - 1].tok.text)) {
            name = st.items[i - 1].tok.text;
            line = st.items[i - 1].tok.line;
            break;
          }
        }
        if (name.empty()) {
          sink.skipped.push_back({pf.file, st.line, "unrecognised function definition"});
          continue;
        }
        if (seen_functions.emplace(name, pf.file).second)
          report.symbols.functions.push_back({name, pf.file, line});
        continue;
      }
      DeclParser parser(types, false);
      parser.anon_seen_ = anon_counter;
      auto decl = parser.parse(st.items);
      anon_counter = parser.anon_seen_;
      if (!decl) {
        sink.skipped.push_back({pf.file, st.line, "unclassified declaration"});
        continue;
      }
      if (decl->is_typedef) continue;
      for (const auto& d : decl->declarators) {
        if (d.function) continue;  // prototype
        flat.flatten(d.name, decl->type, d.pointer, d.bounds, d.line);
      }
    }
    for (auto& f : sink.fields) {
      auto [it, fresh] = seen_fields.emplace(f.path, f.kind);
      if (fresh) {
        report.symbols.fields.push_back(std::move(f));
      } else if (it->second != f.kind) {
        sink.skipped.push_back({pf.file, 0, "conflicting declaration of '" + f.path + "'"});
      }
    }
    for (auto& s : sink.skipped) report.skipped.push_back(std::move(s));
  }
  return report;
}

ParsedFile parse_file(const std::string& text, const std::string& file) {
  auto toks = lex(text);
  std::size_t pos = 0;
  Items top = read_group(toks, pos, false);
  return {file, split_statements(top)};
}

}  // namespace

ScanReport scan_text(const std::string& text, const std::string& file) {
  return scan_parsed({parse_file(text, file)});
}

ScanReport scan_sources(std::vector<std::filesystem::path> paths) {
  std::sort(paths.begin(), paths.end());
  std::vector<ParsedFile> files;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::kScanIo, "cannot read '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::kScanIo, "cannot read '" + p.string() + "'");
    files.push_back(parse_file(buf.str(), p.string()));
  }
  return scan_parsed(files);
}

std::vector<std::filesystem::path> collect_sources(
    const std::vector<std::filesystem::path>& roots) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& root : roots) {
    std::error_code ec;
    if (fs::is_directory(root, ec)) {
      for (const auto& entry : fs::recursive_directory_iterator(root, ec)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".c" || ext == ".h")) out.push_back(entry.path());
      }
    } else {
      out.push_back(root);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SymbolTable parse_manifest(const std::string& text) {
  SymbolTable table;
  std::set<std::string> paths;
  std::set<std::pair<std::string, std::string>> fns;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kManifestParse,
                "manifest line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (words.empty() || words[0].front() == '#') continue;
    if (words[0] == "field") {
      if (words.size() != 3 && words.size() != 4) fail("expected 'field <path> <kind> [unit]'");
      auto kind = parse_scalar_kind(words[2]);
      if (!kind) fail("unknown kind '" + words[2] + "'");
      if (!paths.insert(words[1]).second) fail("duplicate field '" + words[1] + "'");
      table.fields.push_back({words[1], *kind, words.size() == 4 ? words[3] : ""});
    } else if (words[0] == "function") {
      if (words.size() != 3) fail("expected 'function <name> <file>:<line>'");
      auto colon = words[2].rfind(':');
      if (colon == std::string::npos) fail("expected <file>:<line>");
      int fn_line = 0;
      try {
        std::size_t used = 0;
        fn_line = std::stoi(words[2].substr(colon + 1), &used);
        if (used != words[2].size() - colon - 1) fail("bad line number");
      } catch (const std::logic_error&) {
        fail("bad line number");
      }
      std::string file = words[2].substr(0, colon);
      if (!fns.emplace(words[1], file).second)
        fail("duplicate function '" + words[1] + "' in " + file);
      table.functions.push_back({words[1], file, fn_line});
    } else {
      fail("unknown record '" + words[0] + "'");
    }
  }
  return table;
}

std::string format_manifest(const SymbolTable& table) {
  std::string out;
  for (const auto& f : table.fields) {
    out += "field " + f.path + " " + std::string(to_string(f.kind));
    if (!f.unit.empty()) out += " " + f.unit;
    out += "\n";
  }
  for (const auto& f : table.functions)
    out += "function " + f.name + " " + f.file + ":" + std::to_string(f.line) + "\n";
  return out;
}

SymbolTable load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

void save_manifest(const SymbolTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << format_manifest(table);
}

}  // namespace tracelens
