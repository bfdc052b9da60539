// SPDX-License-Identifier: Apache-2.0
#include "pyast/string_literal.hpp"

#include <cctype>
#include <cstdint>

namespace complint::pyast {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string unicode_error(std::size_t from, std::size_t to, const char* what) {
  std::string range = from == to ? "position " + std::to_string(from)
                                 : "bytes in position " + std::to_string(from) + "-" + std::to_string(to);
  if (from == to) return std::string("(unicode error) 'unicodeescape' codec can't decode byte in ") + range + ": " + what;
  return std::string("(unicode error) 'unicodeescape' codec can't decode ") + range + ": " + what;
}

}  // namespace

StringPieces split_string_token(std::string_view token) {
  StringPieces p;
  std::size_t i = 0;
  while (i < token.size() && token[i] != '\'' && token[i] != '"') {
    switch (std::tolower(static_cast<unsigned char>(token[i]))) {
      case 'r': p.raw = true; break;
      case 'b': p.bytes = true; break;
      case 'f': p.fstring = true; break;
      default: break;
    }
    ++i;
  }
  std::size_t q = 1;
  if (i + 2 < token.size() && token[i + 1] == token[i] && token[i + 2] == token[i] && token.size() - i >= 6) q = 3;
  if (token.size() >= i + 2 * q) p.body = token.substr(i + q, token.size() - i - 2 * q);
  return p;
}

bool decode_string_body(std::string_view body, bool raw, bool bytes, std::string& out, std::string& err) {
  out.clear();
  if (raw || body.find('\\') == std::string_view::npos) {
    out.assign(body);
    return true;
  }
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c != '\\') {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::size_t at = i;
    if (i + 1 >= body.size()) {
      if (bytes) {
        err = "(value error) Trailing \\ in string";
      } else {
        err = unicode_error(at, at, "\\ at end of string");
      }
      return false;
    }
    const char e = body[i + 1];
    i += 2;
    switch (e) {
      case '\n': break;
      case '\\': out.push_back('\\'); break;
      case '\'': out.push_back('\''); break;
      case '"': out.push_back('"'); break;
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'v': out.push_back('\v'); break;
      case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
        std::uint32_t v = static_cast<std::uint32_t>(e - '0');
        for (int k = 0; k < 2 && i < body.size() && body[i] >= '0' && body[i] <= '7'; ++k) v = v * 8 + (body[i++] - '0');
        if (bytes) {
          out.push_back(static_cast<char>(v & 0xFF));
        } else {
          append_utf8(out, v);
        }
        break;
      }
      case 'x': {
        int digits = 0;
        std::uint32_t v = 0;
        while (digits < 2 && i < body.size() && hex_value(body[i]) >= 0) {
          v = v * 16 + static_cast<std::uint32_t>(hex_value(body[i++]));
          ++digits;
        }
        if (digits < 2) {
          if (bytes) {
            err = "(value error) invalid \\x escape at position " + std::to_string(at);
          } else {
            err = unicode_error(at, at + 1 + static_cast<std::size_t>(digits), "truncated \\xXX escape");
          }
          return false;
        }
        if (bytes) {
          out.push_back(static_cast<char>(v));
        } else {
          append_utf8(out, v);
        }
        break;
      }
      case 'u':
      case 'U': {
        if (bytes) {
          out.push_back('\\');
          out.push_back(e);
          break;
        }
        const int need = e == 'u' ? 4 : 8;
        int digits = 0;
        std::uint32_t v = 0;
        while (digits < need && i < body.size() && hex_value(body[i]) >= 0) {
          v = v * 16 + static_cast<std::uint32_t>(hex_value(body[i++]));
          ++digits;
        }
        if (digits < need) {
          err = unicode_error(at, at + 1 + static_cast<std::size_t>(digits),
                              e == 'u' ? "truncated \\uXXXX escape" : "truncated \\UXXXXXXXX escape");
          return false;
        }
        if (v > 0x10FFFF) {
          err = unicode_error(at, i - 1, "illegal Unicode character");
          return false;
        }
        append_utf8(out, v);
        break;
      }
      case 'N': {
        if (bytes) {
          out.push_back('\\');
          out.push_back('N');
          break;
        }
        const std::size_t close = i < body.size() && body[i] == '{' ? body.find('}', i) : std::string_view::npos;
        if (close == std::string_view::npos || close == i + 1) {
          err = unicode_error(at, i < body.size() ? i : body.size() - 1, "malformed \\N character escape");
          return false;
        }
        // Character names are not resolved; the replacement character stands in.
        append_utf8(out, 0xFFFD);
        i = close + 1;
        break;
      }
      default:
        out.push_back('\\');
        out.push_back(e);
        break;
    }
  }
  return true;
}

}  // namespace complint::pyast
