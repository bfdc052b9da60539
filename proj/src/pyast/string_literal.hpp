// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace complint::pyast {

/// A string token split into prefix flags and the text between its quotes.
struct StringPieces {
  bool raw = false;
  bool bytes = false;
  bool fstring = false;
  std::string_view body;
};

StringPieces split_string_token(std::string_view token);

/// Decodes backslash escapes of a literal body into UTF-8 (or raw bytes).
/// On failure `err` holds the message ast.parse would report.
bool decode_string_body(std::string_view body, bool raw, bool bytes, std::string& out, std::string& err);

}  // namespace complint::pyast
