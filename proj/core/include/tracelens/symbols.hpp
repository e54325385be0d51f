#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tracelens/model.hpp"

namespace tracelens {

struct SkippedDecl {
  std::string file;
  int line = 0;
  std::string reason;

  friend bool operator==(const SkippedDecl&, const SkippedDecl&) = default;
};

struct ScanReport {
  SymbolTable symbols;
  std::vector<SkippedDecl> skipped;

  friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

// Heuristic scanner for the C subset that matters here: file-scope
// variables (structs flattened to scalar leaves), struct/enum/typedef
// definitions, and function definitions. Macros are not expanded.
// Files are processed in sorted path order.
ScanReport scan_sources(std::vector<std::filesystem::path> paths);

// Scans a single in-memory translation unit. `file` is only used for
// reporting.
ScanReport scan_text(const std::string& text, const std::string& file);

// Collects *.c / *.h files below each directory (files are passed through).
std::vector<std::filesystem::path> collect_sources(
    const std::vector<std::filesystem::path>& roots);

// Manifest: one record per line,
//   field <dot.path> <kind> [unit]
//   function <name> <file>:<line>
// Blank lines and lines starting with '#' are ignored.
SymbolTable parse_manifest(const std::string& text);
std::string format_manifest(const SymbolTable& table);
SymbolTable load_manifest(const std::filesystem::path& path);
void save_manifest(const SymbolTable& table, const std::filesystem::path& path);

}  // namespace tracelens
